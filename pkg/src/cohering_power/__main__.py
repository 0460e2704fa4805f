import sys

from cohering_power.cli import main

sys.exit(main())
