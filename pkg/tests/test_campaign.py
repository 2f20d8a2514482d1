import json

import pytest

from zerolemma import campaign
from zerolemma.campaign import (
    LEMMAS,
    CampaignConfig,
    Caps,
    generate_instance,
    instance_seed,
    run_campaign,
)
from zerolemma.certify import Certification, check_le


def small(lemmas, n=2, **kw):
    return CampaignConfig(seed=7, lemmas=tuple(lemmas), instances=n, **kw)


def test_generate_instance_is_deterministic():
    for kind in campaign.KINDS:
        a = generate_instance(kind, 1, Caps(1, 2, 3))
        b = generate_instance(kind, 1, Caps(1, 2, 3))
        assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)
    with pytest.raises(ValueError):
        generate_instance("nonsense", 1)


def test_generated_instances_respect_caps():
    for seed in range(30):
        problem = generate_instance("implicit", seed, Caps(1, 2, 3)).data
        assert problem.n == 1 and problem.d <= 2
        assert all(abs(c) <= 3 for c in problem.P.terms.values())
        inst = generate_instance("multiform", seed).data
        assert inst.form.P.evaluate(inst.point) == 0
        W = generate_instance("staircase", seed).data
        assert W.cardinality() >= 1


def test_cap_validation():
    with pytest.raises(ValueError):
        Caps(7, 4, 5)
    with pytest.raises(ValueError):
        Caps(3, 0, 5)
    with pytest.raises(ValueError):
        CampaignConfig(lemmas=("9.9",))
    with pytest.raises(ValueError):
        CampaignConfig(order=0)


def test_rejection_budget(monkeypatch):
    monkeypatch.setattr(campaign, "REJECTION_BUDGET", 5)
    rng = campaign.Xoshiro256(0)
    with pytest.raises(RuntimeError, match="budget of 5 draws exhausted for thing"):
        campaign._draw(rng, lambda: None, "thing")


def test_instance_seeds_do_not_depend_on_the_lemma_set():
    a = run_campaign(small(["5.9-psi"]))
    b = run_campaign(small(["2.1", "5.9-psi"]))
    assert [r for r in b.records if r["lemma"] == "5.9-psi"] == a.records
    assert instance_seed(1, "2.1", 0) != instance_seed(1, "2.3", 0)


def test_report_is_reproducible():
    config = small(["2.1", "staircase-sum", "corollary-bounds"], 3)
    first, second = run_campaign(config), run_campaign(config)
    assert first.body_lines() == second.body_lines()
    lines = first.to_jsonl().splitlines()
    assert [json.loads(x)["type"] for x in lines[-2:]] == ["summary", "envelope"]
    assert all(json.loads(x)["type"] == "record" for x in lines[:-2])


def test_all_lemmas_hold_on_a_small_campaign():
    report = run_campaign(CampaignConfig(seed=3, instances=2))
    assert report.counts()["holds"] == 2 * len(LEMMAS)
    assert report.exit_code == 0


def test_empty_campaign():
    report = run_campaign(small([]))
    assert report.records == [] and report.exit_code == 0
    assert report.summary()["counts"] == {"holds": 0, "inconclusive": 0, "FAILED": 0, "error": 0}


def test_failures_and_errors(monkeypatch):
    def failing(n, cfg, seed):
        cert = Certification("forced")
        cert.add(check_le("1 <= 0", 1, 0))
        return [cert]

    def broken(n, cfg, seed):
        raise ArithmeticError("boom")

    monkeypatch.setitem(campaign._PLAN, "5.9-psi", ("psi", failing))
    report = run_campaign(small(["5.9-psi"]))
    assert report.exit_code == 1
    assert report.records[0]["offending"][0]["label"] == "1 <= 0"

    monkeypatch.setitem(campaign._PLAN, "5.9-psi", ("psi", broken))
    report = run_campaign(small(["5.9-psi"]))
    assert report.counts()["error"] == 2 and report.exit_code == 0
    assert report.summary()["warnings"] == 2
    assert report.records[0]["error"] == "ArithmeticError: boom"


def test_parallel_matches_serial():
    config = small(["1.1", "delta-identities", "segre-roundtrip"], 3)
    parallel = CampaignConfig(**{**config.__dict__, "workers": 2})
    assert run_campaign(config).body_lines()[:-1] == run_campaign(parallel).body_lines()[:-1]


def test_per_lemma_counts_and_places():
    config = CampaignConfig(seed=1, lemmas=("2.5", "3.1"), instances=1, counts={"3.1": 2}, places=(2, 3))
    report = run_campaign(config)
    assert [r["lemma"] for r in report.records] == ["2.5", "3.1", "3.1"]
    assert report.exit_code == 0
