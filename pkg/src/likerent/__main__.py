import sys

from likerent.harness.cli import main

sys.exit(main())
