import sys

from phcbi.main import main

sys.exit(main())
