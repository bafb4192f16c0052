import os
import sys

import pytest

build = os.environ.get("SVMC_PYTHON_BUILD")
if build:
    sys.path.insert(0, build)

svmc = pytest.importorskip("svmc")


def test_corpus_names():
    names = svmc.corpus_names()
    assert len(names) == 12
    assert "vm_startup" in names


def test_verify_pass():
    v = svmc.verify("vm_startup")
    assert v["verdict"] == "pass"
    assert v["violations"] == []
    assert 0 < v["states"] < 10**6


def test_verify_replay_failure():
    v = svmc.verify("vm_suspend_resume_original")
    assert v["verdict"] == "fail"
    assert v["violations"][0]["mechanism"] == "replay"
    assert v["violations"][0]["trace"]


def test_budget_is_inconclusive():
    assert svmc.verify("vm_startup", max_states=2)["verdict"] == "inconclusive"


def test_round_trip_and_verify_text():
    src = svmc.corpus_source("evidence_collection")
    assert svmc.round_trip(src)
    assert svmc.verify_text(src)["verdict"] == "pass"


def test_ablate():
    assert svmc.ablate("cloudmonatt_external") == {
        "C1": "necessary",
        "C2": "necessary",
        "C3": "necessary",
    }


def test_discharge():
    d = svmc.discharge("vm_startup", "I1")
    assert d["cert"] == "cert-chain"
    assert d["sig"] == "freshness"


def test_errors():
    with pytest.raises(svmc.ModelError, match="E_UNKNOWN_MODEL"):
        svmc.verify("nosuch")
    with pytest.raises(svmc.ModelError):
        svmc.verify_text("")
