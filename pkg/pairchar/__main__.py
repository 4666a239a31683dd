import sys

from pairchar.main import main

sys.exit(main())
