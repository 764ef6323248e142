from .search import (
    Hypothesis,
    beam_search,
    greedy_decode,
    decode,
    decode_corpus,
    )
from .contrastive import (
    OPEN_BUCKET,
    ContrastiveItem,
    DistanceBucketReport,
    make_contrastive_items,
    prefers_reference,
    contrastive_eval,
    read_contrastive_tsv,
    )
