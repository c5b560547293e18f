################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Typed survey tables and the data-preparation steps applied to them."""
from ._dataset import (
    MISSING_CODE,
    ColumnKind,
    ColumnSchema,
    Dataset,
    validate_schema,
)
from ._filters import (
    FilterRule,
    RejectionEntry,
    RejectionReport,
    apply_plausibility_filters,
    drop_incomplete_rows,
    iqr_fences,
    remove_outliers_iqr,
    save_rejection_report,
)
from ._io import dataset_to_frame, load_csv, save_csv
from ._transforms import (
    DummyCoding,
    center_continuous,
    decode_dummies,
    dummy_code,
    dummy_matrix,
    weighted_center,
)
