from .statistics import (
    loglik_ratio, cox_snell, nagelkerke, design_cox_snell, design_nagelkerke, max_cox_snell, rsq_summary,
)
from .census import census_rsq
