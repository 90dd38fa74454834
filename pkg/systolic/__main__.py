import sys

from systolic.main import main

sys.exit(main())
