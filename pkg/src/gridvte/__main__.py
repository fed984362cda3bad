import sys

from gridvte.cli import main

sys.exit(main())
