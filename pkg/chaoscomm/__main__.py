import sys

from chaoscomm.cli import main

sys.exit(main())
