import sys

from mesocorr.cli import main

sys.exit(main())
