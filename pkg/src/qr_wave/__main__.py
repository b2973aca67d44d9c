"""Allow ``python -m qr_wave``"""

import sys
from .cli import main

sys.exit(main())
