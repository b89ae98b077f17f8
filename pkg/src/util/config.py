import os

from dotenv import load_dotenv

load_dotenv()

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
OUTPUT_PATH = os.getenv("OUTPUT_PATH", "results/")

# Resource caps (cells of a materialized table, type classes, enumerations)
MAX_CELLS = int(float(os.getenv("ONESHOT_MAX_CELLS", "5000000")))
# Total complex PSD dimension accepted by the SDP layer and dense quantum builds
MAX_DIM = int(os.getenv("ONESHOT_MAX_DIM", "64"))
