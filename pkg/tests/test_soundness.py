"""Rejection is checked against exhaustive search for a fragment table."""

import random

from brute import class_program, find_table, two_instances
from randgen import random_dtd
from spmxslt import NotStreamable, convert, parse_document, parse_xslt, transform_dom, transform_stream_bytes


def _classify(seed: int, nested: bool):
    rng = random.Random(seed)
    dtd = random_dtd(rng, max_types=6)
    program = parse_xslt(class_program(rng, dtd, nested=nested))
    (doc1, ev1), (doc2, ev2) = two_instances(dtd)
    t1 = transform_dom(program, parse_document(doc1), dtd)
    t2 = transform_dom(program, parse_document(doc2), dtd)
    try:
        model = convert(dtd, program)
    except NotStreamable as exc:
        model, reason = None, exc.reason
    else:
        reason = None
        assert transform_stream_bytes(model, doc1.encode())[0].decode() == t1
        assert transform_stream_bytes(model, doc2.encode())[0].decode() == t2
    return reason, find_table(ev1, t1, ev2, t2) is not None


def test_rejection_is_exact_without_nested_selections():
    tally = {}
    for seed in range(800):
        reason, found = _classify(seed, nested=False)
        assert found == (reason is None), f"seed {seed}: compiler says {reason}, search found={found}"
        tally[reason] = tally.get(reason, 0) + 1
    # every rejection class is exercised
    assert set(tally) == {None, NotStreamable.ORDER_VIOLATION, NotStreamable.SHARED_STAR_CHILD,
                          NotStreamable.STAR_CONST_STAR}
    assert tally[None] > 400


def test_nested_selections_are_rejected_conservatively():
    # accepted programs always have a table; some rejected ones have one too
    conservative = 0
    for seed in range(600):
        reason, found = _classify(seed, nested=True)
        if reason is None:
            assert found
        elif found:
            assert reason == NotStreamable.ORDER_VIOLATION
            conservative += 1
    assert conservative > 0
