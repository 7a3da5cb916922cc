"""Loading, profiling, cleaning and fixture generation for columnar tables."""
from .table import Column, ColumnTable, DuplicateKeyError, TableError, join_lookup
from .io import CsvFormatError, CacheFormatError, load_csv, load_table, read_ctbl, write_csv, write_ctbl
from .profiling import ColumnProfile, ProfileSummary, profile
from .cleaning import (
    INVALID_STATE_PATTERN,
    CleaningError,
    CleaningRule,
    clean,
    drop_columns,
    drop_matching,
    fill_null,
    map_column,
    parse_unix_timestamp,
)
from .fixtures import FIXTURE_KINDS, generate_fixture
from .prepare import load_instacart, load_reviews, prepare_retail, prepare_reviews, prepare_spending, walmart_rules
