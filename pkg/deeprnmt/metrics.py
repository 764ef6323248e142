from collections import Counter
from collections.abc import Sequence
import math


def token_accuracy(hypotheses: Sequence[Sequence[int]],
                   references: Sequence[Sequence[int]],
                   ) -> float:
    '''
    Fraction of reference tokens matched by the hypothesis token at the same position.
    Missing hypothesis positions count as wrong, surplus ones are ignored.
    '''
    assert len(hypotheses) == len(references), \
        'hypotheses and references must have the same number of sentences'

    total = sum(len(r) for r in references)
    assert total > 0, 'references must contain at least one token'

    correct = sum(sum(1 for (h, r) in zip(hyp, ref) if h == r) for (hyp, ref) in zip(hypotheses, references))
    return correct / total


def _ngrams(tokens: Sequence[int], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu_lite(hypotheses: Sequence[Sequence[int]],
                     references: Sequence[Sequence[int]],
                     max_n: int = 4,
                     ) -> float:
    '''
    Corpus-level BLEU over token ids with a single reference per sentence.

    Modified n-gram precisions are pooled over the corpus. Unigram precision is
    used as is, higher orders are add-one smoothed, and the geometric mean is
    multiplied by the brevity penalty `exp(1 - r/c)` when the hypotheses are
    shorter than the references. Not comparable to mteval-v13a scores.

    :return: Score in `[0, 1]`.
    '''
    assert len(hypotheses) == len(references), \
        'hypotheses and references must have the same number of sentences'

    assert len(hypotheses) > 0, 'corpora must not be empty'

    assert max_n >= 1, 'max_n must be positive'

    matches = [0] * max_n
    totals = [0] * max_n
    for (hyp, ref) in zip(hypotheses, references):
        hyp, ref = list(hyp), list(ref)
        for n in range(1, max_n + 1):
            hyp_ngrams = _ngrams(hyp, n)
            ref_ngrams = _ngrams(ref, n)
            matches[n - 1] += sum(min(count, ref_ngrams[g]) for (g, count) in hyp_ngrams.items())
            totals[n - 1] += max(len(hyp) - n + 1, 0)

    if totals[0] == 0 or matches[0] == 0:
        return 0.0

    log_precision = math.log(matches[0] / totals[0])
    for n in range(1, max_n):
        log_precision += math.log((matches[n] + 1) / (totals[n] + 1))

    hyp_len = sum(len(h) for h in hypotheses)
    ref_len = sum(len(r) for r in references)
    brevity = 1.0 if hyp_len > ref_len else math.exp(1 - ref_len / hyp_len)
    return brevity * math.exp(log_precision / max_n)
