import os
import sys

here = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.join(here, "..", "..", "python"))
if os.environ.get("SPECNET_MODULE_DIR"):
    sys.path.insert(0, os.environ["SPECNET_MODULE_DIR"])
