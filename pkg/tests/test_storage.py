import json

import numpy as np
import pandas as pd
import pytest

from qstlab.core.quantum_state import random_pure_state
from qstlab.exceptions import KeyFileError
from qstlab.models import KeySet, RunManifest
from qstlab.storage import KeySetRepository, ManifestRepository, ReportRepository


@pytest.fixture
def key_set() -> KeySet:
    return KeySet(n=3, codes=[0, 5, 63, 5], epsilon=0.5, certified=True, beta_max=0.125)


class TestKeySetRepository:
    @pytest.mark.parametrize("name", ["keys.json", "keys.txt"])
    def test_round_trip(self, tmp_path, key_set, name):
        repo = KeySetRepository()
        path = repo.save(key_set, tmp_path / name)
        loaded = repo.load(path)
        np.testing.assert_array_equal(loaded.codes, key_set.codes)
        assert loaded.n == 3
        assert loaded.epsilon == 0.5
        assert loaded.certified
        assert loaded.beta_max == 0.125

    def test_json_layout(self, tmp_path, key_set):
        path = KeySetRepository().save(key_set, tmp_path / "keys.json")
        data = json.loads(path.read_text(encoding="utf-8"))
        assert data["keys"] == ["00", "05", "3f", "05"]
        assert path.read_bytes().endswith(b"}\n")

    def test_plain_layout(self, tmp_path):
        path = KeySetRepository().save(KeySet(n=1, codes=[2, 3]), tmp_path / "keys.txt")
        assert path.read_text(encoding="utf-8") == "# n=1\n# certified=false\n2\n3\n"

    def test_plain_file_with_comments(self, tmp_path):
        path = tmp_path / "hand.txt"
        path.write_text("# hand-written\n# n=2\n\n0x0A\n f \n", encoding="utf-8")
        loaded = KeySetRepository().load(path)
        assert loaded.codes.tolist() == [10, 15]
        assert loaded.epsilon is None
        assert not loaded.certified

    @pytest.mark.parametrize(
        "name, text",
        [
            ("bad.txt", "# n=1\nzz\n"),
            ("bad.txt", "2\n3\n"),
            ("bad.txt", "# n=1\n10\n"),
            ("bad.txt", "# n=1\nffffffffffffffffffff\n"),
            ("bad.txt", "# n=1\n"),
            ("bad.json", "{not json"),
            ("bad.json", '{"keys": ["0"]}'),
            ("bad.json", '{"n": 1, "keys": ["0"], "epsilon": 2.0}'),
        ],
        ids=[
            "bad-hex", "no-header", "code-too-wide", "beyond-int64",
            "no-keys", "not-json", "no-n", "epsilon",
        ],
    )
    def test_malformed_files(self, tmp_path, name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        with pytest.raises(KeyFileError):
            KeySetRepository().load(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(KeyFileError):
            KeySetRepository().load(tmp_path / "absent.json")

    def test_relative_paths_use_root(self, tmp_path, key_set):
        repo = KeySetRepository(tmp_path)
        repo.save(key_set, "nested/keys.json")
        assert (tmp_path / "nested" / "keys.json").exists()
        assert repo.load("nested/keys.json").size == 4


class TestReportRepository:
    def test_csv_keeps_full_precision(self, tmp_path):
        frame = pd.DataFrame({"name": ["a"], "value": [0.1]})
        path = ReportRepository().save_table(frame, tmp_path / "t.csv")
        assert path.read_text(encoding="utf-8") == "name,value\na,0.10000000000000001\n"

    def test_json_table_maps_missing_to_null(self, tmp_path):
        frame = pd.DataFrame({"n": [1, 2], "beta": [0.5, np.nan]})
        path = ReportRepository().save_table(frame, tmp_path / "t.json", fmt="json")
        assert json.loads(path.read_text(encoding="utf-8")) == [
            {"n": 1, "beta": 0.5},
            {"n": 2, "beta": None},
        ]

    def test_unknown_table_format(self, tmp_path):
        with pytest.raises(ValueError):
            ReportRepository().save_table(pd.DataFrame(), tmp_path / "t.xml", fmt="xml")

    def test_state_round_trip(self, tmp_path):
        repo = ReportRepository()
        state = random_pure_state(2, 3)
        path = repo.save_model(state, tmp_path / "state.json")
        np.testing.assert_array_equal(repo.load_state(path).amplitudes, state.amplitudes)

    def test_state_file_uses_flat_parts(self, tmp_path):
        path = tmp_path / "state.json"
        path.write_text('{"n": 1, "re": [0, 0.6], "im": [0.8, 0]}', encoding="utf-8")
        repo = ReportRepository()
        state = repo.load_state(path)
        np.testing.assert_allclose(state.amplitudes, [0.8j, 0.6])
        saved = repo.save_model(state, tmp_path / "copy.json")
        assert json.loads(saved.read_text(encoding="utf-8")) == {
            "n": 1,
            "re": [0.0, 0.6],
            "im": [0.8, 0.0],
        }

    def test_invalid_state(self, tmp_path):
        path = tmp_path / "state.json"
        path.write_text('{"n": 1, "re": [1, 1], "im": [0, 0]}', encoding="utf-8")
        with pytest.raises(KeyFileError):
            ReportRepository().load_state(path)


class TestManifestRepository:
    def test_manifest_sits_beside_output(self, tmp_path):
        repo = ManifestRepository()
        manifest = RunManifest(
            command="gen-keys", argv=["gen-keys", "--seed", "1"], flags={}, seed=1, version="1"
        )
        path = repo.save(manifest, tmp_path / "keys.json")
        assert path.name == "keys.json.manifest.json"
        assert repo.load(path) == manifest

    def test_invalid_manifest(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{}", encoding="utf-8")
        with pytest.raises(KeyFileError):
            ManifestRepository().load(path)
