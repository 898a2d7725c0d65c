# Reference values from the published analyses, keyed by our table's design labels.

PUBLISHED_TABLE2 = {
    "case_control m=1": {"sampling_fraction": 0.004,
                         "naive_cs": 0.21, "design_cs": 0.0039, "naive_nag": 0.27, "design_nag": 0.079},
    "case_control m=2": {"sampling_fraction": 0.008,
                         "naive_cs": 0.19, "design_cs": 0.0042, "naive_nag": 0.26, "design_nag": 0.084},
    "case_control m=5": {"sampling_fraction": 0.020,
                         "naive_cs": 0.11, "design_cs": 0.0034, "naive_nag": 0.18, "design_nag": 0.068},
    "case_control m=10": {"sampling_fraction": 0.039,
                          "naive_cs": 0.072, "design_cs": 0.0036, "naive_nag": 0.16, "design_nag": 0.072},
    "case_control m=20": {"sampling_fraction": 0.078,
                          "naive_cs": 0.040, "design_cs": 0.0036, "naive_nag": 0.13, "design_nag": 0.072},
    "population": {"naive_cs": 0.0037, "design_cs": 0.0037, "naive_nag": 0.075, "design_nag": 0.075},
}

PUBLISHED_ESOPH = {
    "main effects": {"naive_cs": 0.14, "design_cs": 0.0005, "naive_nag": 0.23, "design_nag": 0.06},
    "interaction": {"naive_cs": 0.14, "design_cs": 0.0005, "naive_nag": 0.23, "design_nag": 0.06},
}

PUBLISHED_TWO_PHASE = {
    "case_control": {"naive_cs": 0.16, "design_cs": 0.097, "naive_nag": 0.21, "design_nag": 0.17},
    "two_phase": {"design_cs": 0.087, "design_nag": 0.16},
    "full cohort": {"design_cs": 0.086, "design_nag": 0.16},
}
