"""Program generators for long addition and integer multiplication.

``generate`` returns an :class:`~logram.mulgen.emit.Emitter` holding the
assembly text and a metadata dict; ``build`` adds an on-disk cache keyed by
algorithm, size and a hash of everything that influences the emitted text.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple

from ..asm import assemble
from ..isa import MachineConfig, Program
from . import classic, ssc, ssf
from .emit import Emitter, GenError

ALGORITHMS = ("add", "school", "karatsuba", "toom3", "ssc", "ssf")
MULTIPLIERS = ALGORITHMS[1:]
MIN_SIZE = {"add": 64, "school": 64, "karatsuba": 64, "toom3": 256,
            "ssc": 4096, "ssf": 4096}


@dataclass(frozen=True)
class GenParams:
    """Optional overrides; ``None`` means the generator's default choice."""

    karatsuba_cutoff: Optional[int] = None
    ssc_b: Optional[int] = None
    ssc_K: Optional[int] = None
    ssf_b: Optional[int] = None
    ssf_strategy: str = "sqrt"

    def key(self) -> Dict[str, object]:
        return {k: v for k, v in asdict(self).items() if v is not None}


def sentinel(alg: str, n: int) -> Optional[str]:
    """Output pattern that signals lost precision, if the algorithm has one."""
    return "1" * (2 * n) if alg == "ssc" else None


def generate(alg: str, n: int, cfg: MachineConfig,
             params: Optional[GenParams] = None) -> Emitter:
    if alg not in ALGORITHMS:
        raise GenError(f"unknown algorithm {alg!r}; choose from {', '.join(ALGORITHMS)}")
    p = params or GenParams()
    if alg == "add":
        return classic.gen_add(n, cfg)
    if alg == "school":
        return classic.gen_school(n, cfg)
    if alg == "karatsuba":
        return classic.gen_karatsuba(n, cfg, p.karatsuba_cutoff)
    if alg == "toom3":
        return classic.gen_toom3(n, cfg, p.karatsuba_cutoff)
    if alg == "ssc":
        sp = None
        if p.ssc_b is not None or p.ssc_K is not None:
            sp = ssc.ssc_params(n, cfg, b=p.ssc_b, K=p.ssc_K)
        return ssc.gen_ssc(n, cfg, sp)
    plan = ssf.ssf_plan(n, cfg, b=p.ssf_b, strategy=p.ssf_strategy)
    return ssf.gen_ssf(n, cfg, plan)


def cache_key(alg: str, n: int, cfg: MachineConfig,
              params: Optional[GenParams] = None) -> str:
    """Short hash of the inputs that determine the program text.

    The cost model and step budget do not change the emitted text and are
    left out, so unit and depth runs share one file.
    """
    blob = json.dumps({"alg": alg, "n": n, "c": cfg.c, "block": cfg.block,
                       "params": (params or GenParams()).key()}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def format_meta(meta: Dict[str, object]) -> str:
    return "".join(f"{k}={meta[k]}\n" for k in sorted(meta))


def parse_meta(text: str) -> Dict[str, str]:
    out = {}
    for line in text.splitlines():
        if line.strip() and not line.startswith("#"):
            k, _, v = line.partition("=")
            out[k.strip()] = v.strip()
    return out


def build(alg: str, n: int, cfg: MachineConfig, params: Optional[GenParams] = None,
          cache_dir: Optional[Path] = None) -> Tuple[Program, Dict[str, object]]:
    """Generate (or load from ``cache_dir``) the program and its metadata.

    Files are ``<alg>_<n>.lram`` with a ``.meta`` sidecar of ``key=value``
    lines; a ``cache_key`` entry in the sidecar guards against stale files.
    """
    key = cache_key(alg, n, cfg, params)
    if cache_dir is not None:
        cache_dir = Path(cache_dir)
        src_path = cache_dir / f"{alg}_{n}.lram"
        meta_path = cache_dir / f"{alg}_{n}.meta"
        if src_path.exists() and meta_path.exists():
            meta = parse_meta(meta_path.read_text())
            if meta.get("cache_key") == key:
                return assemble(src_path.read_text()), meta
    em = generate(alg, n, cfg, params)
    meta = dict(em.meta, n=n, cache_key=key)
    src = em.source()
    if cache_dir is not None:
        cache_dir.mkdir(parents=True, exist_ok=True)
        src_path.write_text(src)
        meta_path.write_text(format_meta(meta))
    return assemble(src), meta


__all__ = ["ALGORITHMS", "MULTIPLIERS", "MIN_SIZE", "GenParams", "GenError", "Emitter",
           "generate", "build", "cache_key", "sentinel", "format_meta", "parse_meta"]
