from hgat_forecast.ablation.study import (
    ABLATION_COLUMNS,
    AblationRow,
    ablate,
    removal_label,
    standard_removal_sets,
    write_ablation,
)
