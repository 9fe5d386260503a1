"""
Experiment service for key generation, scans, protocol runs and sweeps.
"""

import hashlib
import logging
import math
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import Field, ValidationError

from .. import __version__
from ..config import Settings, get_settings
from ..core.bits import make_rng
from ..core.parallel import parallel_map
from ..core.quantum_state import random_pure_state
from ..core.randomizer import (
    bias_profile,
    certification_threshold,
    dn_key_length,
    full_key_set,
    per_hop_threshold,
    sample_and_certify,
    sample_hop_sets,
    verify_epsilon,
)
from ..core.security_analysis import canonical_ensemble, holevo_bound, holevo_information
from ..exceptions import CapExceededError, CertificationError, ProtocolConfigError
from ..models.base import BaseModel
from ..models.keysets import ChannelSpec, KeySet
from ..models.protocol import ProtocolConfig
from ..models.reports import RunManifest
from ..models.states import PureState
from ..netsim.protocol import keygen_correlated, run_protocol, security_report, with_key_sets
from ..storage.repository import (
    KeySetRepository,
    ManifestRepository,
    ReportRepository,
    sha256_file,
)

logger = logging.getLogger(__name__)


class CommandOutcome(BaseModel):
    """Files touched by one command and the exit code it maps to."""

    exit_code: int = 0
    inputs: List[str] = Field(default_factory=list)
    outputs: List[str] = Field(default_factory=list)
    messages: List[str] = Field(default_factory=list)


def hop_path(out: Path, hop: int) -> Path:
    """keys.json -> keys.hop1.json"""
    return out.with_name(f"{out.stem}.hop{hop}{out.suffix}")


def key_set_digest(key_set: KeySet) -> str:
    """sha256 of the packed codes, for sets that never touched disk."""
    return hashlib.sha256(key_set.codes.astype("<i8").tobytes()).hexdigest()


class ExperimentService:
    """Service class for every command-line experiment."""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.key_sets = KeySetRepository()
        self.reports = ReportRepository()
        self.manifests = ManifestRepository()

    # Caps ---------------------------------------------------------------------

    def check_caps(self, n: int, dense: bool = True) -> None:
        """Fail fast before any allocation beyond the configured caps."""
        if 2 * n > self.settings.transform_cap:
            raise CapExceededError(
                f"2n = {2 * n} exceeds the transform cap {self.settings.transform_cap}"
            )
        if dense and n > self.settings.dense_cap:
            raise CapExceededError(f"n = {n} exceeds the dense cap {self.settings.dense_cap}")

    def check_key_length(self, n: int, epsilon: float) -> int:
        n_dn = dn_key_length(n, epsilon)
        if n_dn > self.settings.transform_cap:
            raise CapExceededError(
                f"2^{n_dn} keys exceeds the key-set cap 2^{self.settings.transform_cap}"
            )
        return n_dn

    # Commands -----------------------------------------------------------------

    def gen_keys(
        self,
        n: int,
        epsilon: float,
        out: Path,
        seed: int,
        hops: Optional[int] = None,
        max_retries: int = 50,
        key_count: Optional[int] = None,
    ) -> CommandOutcome:
        """
        Sample and certify key sets and write them to disk.

        With ``hops`` set, writes one set per hop certified at the per-hop
        threshold of an (hops + 1)-party chain.

        Raises:
            CertificationError: If no set met its threshold
        """
        self.check_caps(n, dense=False)
        if key_count is None:
            self.check_key_length(n, epsilon)
        if hops is None:
            result = sample_and_certify(n, epsilon, seed, max_retries, key_count=key_count)
            path = self.key_sets.save(result.key_set, out)
            return CommandOutcome(
                outputs=[str(path)],
                messages=[
                    f"certified {result.key_set.size} keys, beta_max="
                    f"{result.profile.beta_max:.6g} <= {result.threshold:.6g} "
                    f"(attempt {result.attempts})"
                ],
            )
        if hops < 1:
            raise ValueError("--hops must be at least 1")
        results = sample_hop_sets(n, epsilon, hops + 1, seed, max_retries, key_count=key_count)
        outputs, messages = [], []
        for hop, result in enumerate(results, start=1):
            outputs.append(str(self.key_sets.save(result.key_set, hop_path(out, hop))))
            messages.append(
                f"hop {hop}: {result.key_set.size} keys, beta_max="
                f"{result.profile.beta_max:.6g} <= {result.threshold:.6g}"
            )
        return CommandOutcome(outputs=outputs, messages=messages)

    def bias_scan(
        self, keys_path: Path, out: Path, fmt: str = "csv", epsilon: Optional[float] = None
    ) -> CommandOutcome:
        """Bias at every (a, b) with a closing beta_max row."""
        key_set = self.key_sets.load(keys_path)
        self.check_caps(key_set.n, dense=False)
        profile = bias_profile(key_set)
        n = key_set.n
        width = (n + 3) // 4
        codes = np.arange(1 << (2 * n), dtype=np.int64)
        mask = (1 << n) - 1
        frame = pd.DataFrame(
            {
                "a": [format(a, f"0{width}x") for a in (codes >> n).tolist()],
                "b": [format(b, f"0{width}x") for b in (codes & mask).tolist()],
                "beta": profile.beta,
            }
        )
        target_epsilon = epsilon if epsilon is not None else key_set.epsilon
        threshold = (
            certification_threshold(n, target_epsilon) if target_epsilon is not None else None
        )
        certified = threshold is not None and profile.beta_max <= threshold
        verdict = "n/a" if threshold is None else ("certified" if certified else "not certified")
        footer = {"beta_max": profile.beta_max, "threshold": threshold, "verdict": verdict}

        if fmt == "csv":
            frame.insert(0, "kind", "bias")
            summary = pd.DataFrame(
                [{"kind": "beta_max", "a": "", "b": "", "beta": profile.beta_max}]
            )
            table = pd.concat([frame, summary], ignore_index=True)
            table["threshold"] = [None] * len(frame) + [threshold]
            table["verdict"] = [""] * len(frame) + [verdict]
            path = self.reports.save_table(table, out, "csv")
        elif fmt == "json":
            records = frame.to_dict(orient="records")
            path = self.reports.write_json(out, {"n": n, "rows": records, "footer": footer})
        else:
            raise ValueError(f"Unknown format {fmt!r}")
        return CommandOutcome(
            inputs=[str(keys_path)],
            outputs=[str(path)],
            messages=[f"beta_max={profile.beta_max:.6g} ({verdict})"],
        )

    def load_state(self, source: str, n: int, seed: int) -> PureState:
        """``zero``, ``random`` or a path to a state JSON file."""
        if source == "zero":
            return PureState.basis(n, 0)
        if source == "random":
            return random_pure_state(n, make_rng(seed, "input"))
        state = self.reports.load_state(source)
        if state.n != n:
            raise ProtocolConfigError(f"State file holds {state.n} qubits, expected {n}")
        return state

    def run(
        self,
        m: int,
        n: int,
        epsilon: float,
        seed: int,
        out: Path,
        keys_paths: Sequence[Path] = (),
        state_source: str = "zero",
        record_states: bool = False,
        taps: Sequence[int] = (),
        break_keys: bool = False,
        trials: int = 200,
        max_retries: int = 50,
    ) -> CommandOutcome:
        """
        End-to-end protocol run plus its security report.

        Exit code 0 only when the state decodes and the security check passes.
        """
        self.check_caps(n)
        key_sets = [self.key_sets.load(path) for path in keys_paths] or None
        if key_sets is not None and len(key_sets) != m - 1:
            raise ProtocolConfigError(f"m={m} needs {m - 1} key files, got {len(key_sets)}")
        try:
            config = ProtocolConfig(
                m=m,
                n=n,
                epsilon=epsilon,
                key_sets=key_sets,
                seed=seed,
                taps=list(taps),
                record_states=record_states,
                max_retries=max_retries,
            )
        except ValidationError as e:
            raise ProtocolConfigError(f"Invalid protocol configuration: {e}") from e
        config = with_key_sets(config)
        assert config.key_sets is not None

        state = self.load_state(state_source, n, seed)
        keys = keygen_correlated(config)
        if break_keys:
            keys = keys.with_flipped_bit(0)
        transcript = run_protocol(config, state, keys)
        report = security_report(config, trials)

        hashes = (
            [sha256_file(path) for path in keys_paths]
            if keys_paths
            else [key_set_digest(key_set) for key_set in config.key_sets]
        )
        document = {
            "config": config.model_dump(mode="json", exclude={"key_sets"}),
            "key_set_hashes": hashes,
            "transcript": transcript,
            "security": report,
            "holevo": report.holevo_report(),
        }
        path = self.reports.save_document(document, out)

        ok = transcript.decoded and report.passed
        if not ok:
            logger.error(
                f"Run failed: decoded={transcript.decoded}, security pass={report.passed}"
            )
        return CommandOutcome(
            exit_code=0 if ok else 4,
            inputs=[str(p) for p in keys_paths]
            + ([state_source] if state_source not in {"zero", "random"} else []),
            outputs=[str(path)],
            messages=[
                f"fidelity={transcript.fidelity:.12g} decoded={transcript.decoded}",
                f"composed distance={report.composed_distance:.6g} chi={report.chi:.6g} "
                f"bound={report.holevo.value:.6g} pass={report.passed}",
            ],
        )

    def _sweep_row(
        self, n: int, epsilon: Optional[float], m: int, trials: int, seed: int, max_retries: int
    ) -> Dict[str, object]:
        kind = "control" if epsilon is None else "sample"
        row: Dict[str, object] = {
            "kind": kind,
            "n": n,
            "epsilon": 0.0 if epsilon is None else epsilon,
            "n_dn": 2 * n if epsilon is None else dn_key_length(n, epsilon),
            "two_n": 2 * n,
            "per_hop_threshold": math.nan
            if epsilon is None
            else per_hop_threshold(n, epsilon, m),
            "beta_max": math.nan,
            "certified": None,
            "max_distance": math.nan,
            "chi": math.nan,
            "bound": math.nan,
            "status": "ok",
        }
        try:
            self.check_caps(n)
            if epsilon is None:
                key_set = full_key_set(n)
                check_epsilon = 1.0
            else:
                self.check_key_length(n, epsilon)
                rng = make_rng(seed, "sweep", str(n), repr(epsilon))
                row_seed = int(rng.integers(0, 2**63 - 1))
                try:
                    key_set = sample_and_certify(n, epsilon, row_seed, max_retries).key_set
                except CertificationError as e:
                    assert e.best_key_set is not None
                    key_set = e.best_key_set
                    row["status"] = "uncertified"
                check_epsilon = epsilon
        except CapExceededError as e:
            row["status"] = f"skipped: {e}"
            return row

        report = verify_epsilon(key_set, check_epsilon, trials=trials, seed=seed)
        row["beta_max"] = report.beta_max
        row["certified"] = report.certified if epsilon is not None else True
        row["max_distance"] = report.max_distance
        row["chi"] = holevo_information(canonical_ensemble(n), key_set)
        row["bound"] = holevo_bound(1 << n, check_epsilon if epsilon is not None else 0.0).value
        return row

    def sweep(
        self,
        n_values: Sequence[int],
        epsilons: Sequence[float],
        m: int,
        trials: int,
        seed: int,
        out: Path,
        fmt: str = "csv",
        max_retries: int = 50,
    ) -> CommandOutcome:
        """
        One row per (n, epsilon) plus a full-set control row per n.

        Rows beyond the caps are kept and marked skipped. ``m`` only feeds the
        per_hop_threshold column; every other column is a single-hop figure.
        """
        tasks = []
        for n in n_values:
            tasks.append((n, None))
            tasks.extend((n, epsilon) for epsilon in epsilons)
        rows = parallel_map(
            lambda task: self._sweep_row(task[0], task[1], m, trials, seed, max_retries), tasks
        )
        frame = pd.DataFrame(rows)
        path = self.reports.save_table(frame, out, fmt)
        skipped = sum(1 for row in rows if str(row["status"]).startswith("skipped"))
        return CommandOutcome(
            outputs=[str(path)],
            messages=[f"{len(rows)} rows, {skipped} skipped"],
        )

    def verify(
        self, keys_paths: Sequence[Path], epsilon: float, trials: int, seed: int, out: Path
    ) -> CommandOutcome:
        """Certificate and Monte-Carlo check of the composition of the given sets."""
        key_sets = [self.key_sets.load(path) for path in keys_paths]
        spec = ChannelSpec(hops=key_sets)
        self.check_caps(spec.n)
        report = verify_epsilon(spec, epsilon, trials=trials, seed=seed)
        path = self.reports.save_model(report, out)
        return CommandOutcome(
            exit_code=0 if report.passed else 2,
            inputs=[str(p) for p in keys_paths],
            outputs=[str(path)],
            messages=[
                f"beta_max={report.beta_max:.6g} threshold={report.threshold:.6g} "
                f"max distance={report.max_distance:.6g} pass={report.passed}"
            ],
        )

    # Manifests ----------------------------------------------------------------

    def record(
        self,
        command: str,
        argv: Sequence[str],
        flags: Dict[str, Optional[str]],
        seed: int,
        outcome: CommandOutcome,
    ) -> List[Path]:
        """Write a RunManifest beside every output of ``outcome``."""
        manifest = RunManifest(
            command=command,
            argv=list(argv),
            flags=flags,
            seed=seed,
            version=__version__,
            input_hashes={p: sha256_file(p) for p in outcome.inputs},
            outputs=list(outcome.outputs),
            output_hashes={p: sha256_file(p) for p in outcome.outputs},
            exit_code=outcome.exit_code,
        )
        return [self.manifests.save(manifest, output) for output in outcome.outputs]

    def replay(self, manifest_path: Path, runner: Callable[[List[str]], int]) -> CommandOutcome:
        """
        Re-run the command a manifest records and compare output hashes.

        ``runner`` executes an argv and returns its exit code.
        """
        manifest = self.manifests.load(manifest_path)
        changed = [
            p
            for p, h in manifest.input_hashes.items()
            if not Path(p).exists() or sha256_file(p) != h
        ]
        if changed:
            raise ProtocolConfigError(f"Inputs changed since the recorded run: {changed}")
        code = runner(list(manifest.argv))
        mismatched = [
            p
            for p, h in manifest.output_hashes.items()
            if not Path(p).exists() or sha256_file(p) != h
        ]
        messages = [f"replayed {manifest.command}: exit {code}"]
        messages += [f"output differs: {p}" for p in mismatched]
        ok = not mismatched and code == manifest.exit_code
        return CommandOutcome(
            exit_code=0 if ok else 4,
            inputs=[str(manifest_path)],
            messages=messages,
        )
