from circumext.cli import main
import sys

sys.exit(main())
