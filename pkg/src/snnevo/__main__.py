import sys

from snnevo.cli import main

sys.exit(main())
