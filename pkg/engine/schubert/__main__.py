import sys

from schubert.main import main

sys.exit(main())
