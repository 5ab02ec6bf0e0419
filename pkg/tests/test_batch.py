import pytest

from verikit.batch import BatchJob, run_batch
from verikit.equiv import CheckConfig

FAST = CheckConfig(m=3, n=60)


def _canonical(reports):
    out = []
    for r in reports:
        d = dict(r)
        d.pop("wall_time", None)
        out.append(d)
    return out


def _job(corpus, n=12):
    pairs = []
    for design in corpus[:n]:
        pairs.append((design.name, design.source, design.source))
    return BatchJob(pairs=pairs, config=FAST)


def test_reports_in_job_order(corpus):
    job = _job(corpus)
    reports, stats = run_batch(job, workers=1)
    assert [r["id"] for r in reports] == [p[0] for p in job.pairs]
    assert stats.pairs == len(job.pairs)
    assert all(r["verdict"] == "equivalent" for r in reports)


def test_worker_count_does_not_change_reports(corpus):
    job = _job(corpus, n=8)
    solo, _ = run_batch(job, workers=1)
    pooled, _ = run_batch(job, workers=4)
    assert _canonical(solo) == _canonical(pooled)


def test_empty_job():
    reports, stats = run_batch(BatchJob(pairs=[], config=FAST), workers=2)
    assert reports == [] and stats.pairs == 0


def test_duplicate_ids_rejected(ringer_src):
    with pytest.raises(ValueError, match="unique"):
        BatchJob(pairs=[("a", ringer_src, ringer_src),
                        ("a", ringer_src, ringer_src)])


def test_per_pair_failures_embedded(ringer_src):
    job = BatchJob(pairs=[
        ("ok", ringer_src, ringer_src),
        ("bad", "module m(input a, output b); initial b = 0; endmodule", ringer_src),
    ], config=FAST)
    reports, _ = run_batch(job, workers=1)
    assert reports[0]["verdict"] == "equivalent"
    assert reports[1]["verdict"] == "unsupported"
