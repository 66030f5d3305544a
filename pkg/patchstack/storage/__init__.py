"""File formats. Model files need torch: import `patchstack.storage.model_store` directly."""

from .dataset_store import iter_dataset, load_dataset, write_dataset
from .records import dumps, number_text
from .tables import table_text, write_table

__all__ = ["dumps", "iter_dataset", "load_dataset", "number_text", "table_text", "write_dataset", "write_table"]
