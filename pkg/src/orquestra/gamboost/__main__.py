################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
import sys

from .cli import main

sys.exit(main())
