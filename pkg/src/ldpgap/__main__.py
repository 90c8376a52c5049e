import sys

from ldpgap.cli import main

sys.exit(main())
