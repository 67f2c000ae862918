# Copyright 2026 The seuscrub Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import random

import pytest

import seuscrub


def test_crc32_check_value():
    assert seuscrub.crc32(b"123456789") == 0xCBF43926
    assert seuscrub.crc32(b"") == 0


def test_ecc_roundtrip_and_single_correction():
    rng = random.Random(5)
    payload = [rng.randrange(2) for _ in range(seuscrub.payload_bits(1312))]
    frame = seuscrub.ecc_encode(payload)
    assert len(frame) == 1312
    assert seuscrub.ecc_decode(frame) == ("Clean", 0)
    frame[700] ^= 1
    status, pos = seuscrub.ecc_decode(frame)
    assert (status, pos) == ("Corrected", 700)
    frame[3] ^= 1
    assert seuscrub.ecc_decode(frame)[0] == "DetectedUncorrectable"


def test_ecc_rejects_wrong_payload_size():
    with pytest.raises(ValueError):
        seuscrub.ecc_encode([0] * 10)


def test_default_campaign_roundtrip():
    c = seuscrub.default_campaign()
    assert c["experiments"] == 1000
    assert seuscrub.load_campaign(__import__("json").dumps(c)) == c


def test_unknown_key_rejected():
    with pytest.raises(seuscrub.ConfigError):
        seuscrub.load_campaign("experiments: 3\nbogus: 1\n")


def test_goldrun_tracks_setpoint():
    trace = seuscrub.goldrun()
    assert len(trace) == 42000
    setpoint, measured, _ = trace[6999]
    assert setpoint == 15.0
    assert abs(measured - 15.0) < 0.1


def test_experiment_is_reproducible():
    exp = seuscrub.experiment(policy="blind_full:100", index=4)
    a = seuscrub.run_experiment(exp)
    b = seuscrub.run_experiment(exp)
    assert a == b
    assert a["fingerprint"] == seuscrub.fingerprint(exp)


def test_small_campaign():
    c = seuscrub.default_campaign()
    c["experiments"] = 20
    c["policies"] = ["none", "blind_full:100"]
    res = seuscrub.run_campaign(c)
    assert [s["policy"] for s in res["summaries"]] == ["none", "blind_full:100"]
    assert res["summaries"][1]["failure"] <= res["summaries"][0]["failure"]
    assert res["aggregate_csv"] == seuscrub.run_campaign(c)["aggregate_csv"]


def test_cli_gen_config_and_bad_config(tmp_path):
    rc, out, _ = seuscrub.cli("gen-config")
    assert rc == 0
    assert "experiments" in out
    bad = tmp_path / "bad.yaml"
    bad.write_text("experiments: -1\n")
    assert seuscrub.cli("run", bad, "--out", tmp_path / "o")[0] == 2
