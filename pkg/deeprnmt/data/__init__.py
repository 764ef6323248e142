from .tasks import (
    EOS_ID,
    UNK_ID,
    FIRST_CONTENT_ID,
    TASK_KINDS,
    Pair,
    Vocabulary,
    AgreementLexicon,
    AgreementExample,
    SyntheticTask,
    agreement_example,
    generate,
    with_eos,
    )
from .batching import (
    Batch,
    pad,
    make_batches,
    )
