import sys

from dftsafety.cli import main

sys.exit(main())
