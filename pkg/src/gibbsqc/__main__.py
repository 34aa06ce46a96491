import sys

from gibbsqc.cli import main

sys.exit(main())
