import json

import pandas as pd
import pytest

from qstlab.cli import main
from qstlab.core.randomizer import full_key_set, singleton_key_set
from qstlab.models import PauliKey
from qstlab.storage import KeySetRepository

pytestmark = pytest.mark.integration


def gen_keys(out, n=4, epsilon=0.8, seed=7, *extra) -> int:
    return main(
        ["gen-keys", "--n", str(n), "--epsilon", str(epsilon), "--seed", str(seed),
         "--out", str(out), *extra]
    )


@pytest.fixture
def hop_keys(tmp_path):
    out = tmp_path / "keys.json"
    assert gen_keys(out, 3, 0.8, 5, "--hops", "2") == 0
    return [tmp_path / "keys.hop1.json", tmp_path / "keys.hop2.json"]


class TestGenKeys:
    def test_certified_set_and_manifest(self, tmp_path):
        out = tmp_path / "keys.json"
        assert gen_keys(out) == 0
        key_set = KeySetRepository().load(out)
        assert key_set.size == 512
        assert key_set.certified
        manifest = json.loads((tmp_path / "keys.json.manifest.json").read_text(encoding="utf-8"))
        assert manifest["command"] == "gen-keys"
        assert manifest["seed"] == 7
        assert str(out) in manifest["output_hashes"]

    def test_key_count_follows_epsilon(self, tmp_path):
        out = tmp_path / "keys.txt"
        assert gen_keys(out, 2, 1.0, 1) == 0
        assert KeySetRepository().load(out).size == 64

    def test_output_is_byte_deterministic(self, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        assert gen_keys(first, 3, 0.5, 9) == 0
        assert gen_keys(second, 3, 0.5, 9) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_default_seed_is_recorded(self, tmp_path):
        out = tmp_path / "keys.json"
        assert main(["gen-keys", "--n", "2", "--epsilon", "1", "--out", str(out)]) == 0
        manifest = json.loads((tmp_path / "keys.json.manifest.json").read_text(encoding="utf-8"))
        assert manifest["argv"][-2:] == ["--seed", "20140101"]

    def test_unattainable_certification(self, tmp_path, capsys):
        out = tmp_path / "keys.json"
        code = gen_keys(out, 1, 0.1, 1, "--key-count", "2", "--max-retries", "3")
        assert code == 2
        assert "best beta_max=1" in capsys.readouterr().err
        assert not out.exists()

    def test_per_hop_files(self, hop_keys):
        for path in hop_keys:
            assert KeySetRepository().load(path).certified

    def test_bad_flag_value(self, tmp_path):
        assert main(["gen-keys", "--n", "four", "--epsilon", "0.5"]) == 3


class TestBiasScan:
    def test_full_set_is_unbiased(self, tmp_path):
        keys = tmp_path / "full.json"
        KeySetRepository().save(full_key_set(2), keys)
        out = tmp_path / "scan.csv"
        assert main(["bias-scan", str(keys), "--out", str(out), "--epsilon", "0.5"]) == 0
        table = pd.read_csv(out, dtype={"a": str, "b": str})
        assert len(table) == 17
        rows = table[table["kind"] == "bias"]
        assert rows["beta"].iloc[0] == 1.0
        assert rows["beta"].iloc[1:].max() == 0.0
        footer = table.iloc[-1]
        assert footer["kind"] == "beta_max"
        assert footer["verdict"] == "certified"

    def test_singleton_is_fully_biased(self, tmp_path):
        keys = tmp_path / "one.txt"
        KeySetRepository().save(singleton_key_set(PauliKey(n=1, a=1, b=0)), keys)
        out = tmp_path / "scan.json"
        assert main(["bias-scan", str(keys), "--out", str(out), "--format", "json"]) == 0
        data = json.loads(out.read_text(encoding="utf-8"))
        assert [row["beta"] for row in data["rows"]] == [1.0, 1.0, 1.0, 1.0]
        assert data["footer"]["verdict"] == "n/a"

    def test_rerun_gives_identical_bytes(self, tmp_path):
        keys = tmp_path / "keys.json"
        assert gen_keys(keys, 2, 1.0, 2) == 0
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["bias-scan", str(keys), "--out", str(first)]) == 0
        assert main(["bias-scan", str(keys), "--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_malformed_key_file(self, tmp_path):
        keys = tmp_path / "bad.txt"
        keys.write_text("# n=1\nnot-hex\n", encoding="utf-8")
        assert main(["bias-scan", str(keys), "--out", str(tmp_path / "scan.csv")]) == 3

    def test_key_wider_than_machine_word(self, tmp_path):
        keys = tmp_path / "wide.txt"
        keys.write_text("# n=1\nffffffffffffffffffff\n", encoding="utf-8")
        assert main(["bias-scan", str(keys), "--out", str(tmp_path / "scan.csv")]) == 3


class TestRun:
    def run_args(self, hop_keys, out, *extra):
        return [
            "run", "--m", "3", "--n", "3", "--epsilon", "0.8", "--seed", "1",
            "--trials", "40", "--transcript-out", str(out),
            "--keys", *[str(p) for p in hop_keys], *extra,
        ]

    def test_certified_chain(self, tmp_path, hop_keys):
        out = tmp_path / "transcript.json"
        assert main(self.run_args(hop_keys, out)) == 0
        document = json.loads(out.read_text(encoding="utf-8"))
        assert document["transcript"]["decoded"]
        assert document["security"]["passed"]
        assert set(document["holevo"]) == {"chi", "bound", "base", "d", "epsilon", "pass"}
        assert document["holevo"]["pass"]
        assert document["holevo"]["chi"] == document["security"]["chi"]
        assert len(document["key_set_hashes"]) == 2
        assert (tmp_path / "transcript.json.manifest.json").exists()

    def test_transcript_is_reproducible(self, tmp_path, hop_keys):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        assert main(self.run_args(hop_keys, first, "--record-states", "--taps", "2")) == 0
        assert main(self.run_args(hop_keys, second, "--record-states", "--taps", "2")) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_broken_keys(self, tmp_path, hop_keys):
        out = tmp_path / "transcript.json"
        assert main(self.run_args(hop_keys, out, "--break-keys")) == 4
        assert not json.loads(out.read_text(encoding="utf-8"))["transcript"]["decoded"]

    def test_wrong_number_of_key_files(self, tmp_path, hop_keys):
        args = self.run_args(hop_keys[:1], tmp_path / "t.json")
        assert main(args) == 4

    def test_sampled_keys(self, tmp_path):
        out = tmp_path / "t.json"
        args = ["run", "--m", "2", "--n", "2", "--epsilon", "1", "--trials", "20",
                "--state", "random", "--transcript-out", str(out)]
        assert main(args) == 0

    def test_dense_cap(self, tmp_path):
        args = ["run", "--m", "2", "--n", "11", "--epsilon", "0.5",
                "--transcript-out", str(tmp_path / "t.json")]
        assert main(args) == 3


class TestSweepVerifyReplay:
    def test_sweep_table(self, tmp_path):
        out = tmp_path / "sweep.csv"
        args = ["sweep", "--n-range", "1:4", "--epsilons", "0.5,1.0", "--trials", "20",
                "--seed", "3", "--out", str(out)]
        assert main(args) == 0
        table = pd.read_csv(out)
        assert len(table) == 12
        assert (table["status"] == "ok").all()
        row = table[(table["n"] == 4) & (table["epsilon"] == 1.0)].iloc[0]
        assert row["n_dn"] == 8
        controls = table[table["kind"] == "control"]
        assert len(controls) == 4
        assert (controls["n_dn"] == 2 * controls["n"]).all()
        assert controls["max_distance"].max() < 1e-9

    def test_party_count_only_moves_per_hop_threshold(self, tmp_path):
        tables = []
        for m in (2, 4):
            out = tmp_path / f"sweep{m}.csv"
            args = ["sweep", "--n-range", "1:2", "--epsilons", "1.0", "--trials", "5",
                    "--seed", "3", "--m", str(m), "--out", str(out)]
            assert main(args) == 0
            tables.append(pd.read_csv(out))
        two, four = tables
        pd.testing.assert_frame_equal(
            two.drop(columns="per_hop_threshold"), four.drop(columns="per_hop_threshold")
        )
        samples = two["kind"] == "sample"
        looser = four.loc[samples, "per_hop_threshold"] > two.loc[samples, "per_hop_threshold"]
        assert looser.all()

    def test_verify_certified_set(self, tmp_path):
        keys = tmp_path / "keys.json"
        assert gen_keys(keys) == 0
        out = tmp_path / "verify.json"
        args = ["verify", str(keys), "--epsilon", "0.8", "--trials", "50", "--out", str(out)]
        assert main(args) == 0
        assert json.loads(out.read_text(encoding="utf-8"))["passed"]

    def test_verify_identity_fails(self, tmp_path):
        keys = tmp_path / "zero.json"
        KeySetRepository().save(singleton_key_set(PauliKey.zero(2)), keys)
        args = ["verify", str(keys), "--epsilon", "0.5", "--trials", "5",
                "--out", str(tmp_path / "v.json")]
        assert main(args) == 2

    def test_replay_reproduces_outputs(self, tmp_path):
        keys = tmp_path / "keys.json"
        assert gen_keys(keys, 2, 1.0, 4) == 0
        before = keys.read_bytes()
        assert main(["replay", str(tmp_path / "keys.json.manifest.json")]) == 0
        assert keys.read_bytes() == before

    def test_replay_detects_changed_output(self, tmp_path):
        keys = tmp_path / "keys.json"
        assert gen_keys(keys, 2, 1.0, 4) == 0
        manifest_path = tmp_path / "keys.json.manifest.json"
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        manifest["output_hashes"][str(keys)] = "0" * 64
        manifest_path.write_text(json.dumps(manifest), encoding="utf-8")
        assert main(["replay", str(manifest_path)]) == 4
