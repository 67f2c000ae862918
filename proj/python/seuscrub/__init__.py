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

"""SEU injection and scrubbing simulator."""

import json

from . import _core
from ._core import ConfigError, crc32, ecc_decode, ecc_encode, payload_bits

__all__ = [
    "ConfigError",
    "cli",
    "crc32",
    "default_campaign",
    "ecc_decode",
    "ecc_encode",
    "experiment",
    "fingerprint",
    "goldrun",
    "load_campaign",
    "payload_bits",
    "run_campaign",
    "run_experiment",
]


def _text(campaign):
    if campaign is None:
        return ""
    if isinstance(campaign, str):
        return campaign
    return json.dumps(campaign)


def default_campaign():
    return json.loads(_core.default_campaign_json())


def load_campaign(text):
    """Parse YAML or JSON campaign text into a dict (strict)."""
    return json.loads(_core.parse_campaign_json(text))


def experiment(campaign=None, policy="none", index=0):
    """Experiment config for one (policy, index) cell of a campaign."""
    return json.loads(_core.experiment_json(_text(campaign), policy, index))


def fingerprint(exp):
    return _core.fingerprint(json.dumps(exp))


def goldrun(exp=None):
    """(setpoint, measured, actuation) per tick of the fault-free run."""
    return _core.goldrun(json.dumps(exp if exp is not None else experiment()))


def run_experiment(exp):
    return json.loads(_core.run_experiment_json(json.dumps(exp)))


def run_campaign(campaign=None):
    return _core.run_campaign(_text(campaign))


def cli(*args):
    """Run the command line tool in-process; returns (exit_code, stdout, stderr)."""
    return _core.cli([str(a) for a in args])
