from hgat_forecast.hgat.attention import (
    AttentionRecord,
    AttentionTrace,
    attention_between,
    read_attention_jsonl,
    summarize_attention,
    write_attention_jsonl,
)
from hgat_forecast.hgat.layer import HgatLayer, HgatStack, collect_attention
