from .data_types import Dataset, FitResult, RsqSummary, Family, INTERCEPT_NAME
from .errors import *
