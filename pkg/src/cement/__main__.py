import sys

from cement.cli import main

sys.exit(main())
