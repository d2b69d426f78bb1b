import sys

from ipmagnus.cli import main

sys.exit(main())
