import sys

from .cli_frontend import main

sys.exit(main())
