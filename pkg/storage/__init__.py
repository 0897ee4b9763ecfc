from .files import atomic_write_text, dumps_fixed, read_json, read_jsonl
from .repository import (
    export_labels,
    export_predictions,
    export_scores,
    import_labels,
    import_predictions,
    import_scores,
    load_dataset,
    load_model,
    parse_dataset,
    save_dataset,
    save_model,
    write_ablation,
    write_metrics,
)

__all__ = [
    "atomic_write_text",
    "dumps_fixed",
    "read_json",
    "read_jsonl",
    "export_labels",
    "export_predictions",
    "export_scores",
    "import_labels",
    "import_predictions",
    "import_scores",
    "load_dataset",
    "load_model",
    "parse_dataset",
    "save_dataset",
    "save_model",
    "write_ablation",
    "write_metrics",
]
