import pytest

from logram.isa import MachineConfig
from logram.mulgen import (
    ALGORITHMS, MIN_SIZE, GenError, GenParams, build, cache_key, format_meta, generate,
    parse_meta, sentinel,
)


def test_algorithm_table():
    assert ALGORITHMS == ("add", "school", "karatsuba", "toom3", "ssc", "ssf")
    assert set(MIN_SIZE) == set(ALGORITHMS)


def test_sentinel():
    assert sentinel("ssc", 4) == "11111111"
    assert sentinel("ssf", 4) is None


def test_cache_key_depends_on_text_inputs_only():
    cfg = MachineConfig(n=4096)
    k = cache_key("ssc", 4096, cfg)
    assert k == cache_key("ssc", 4096, cfg.replace(model="depth", max_steps=10))
    assert k != cache_key("ssc", 4096, cfg.replace(c=9))
    assert k != cache_key("ssc", 4096, cfg.replace(block=32))
    assert k != cache_key("ssc", 4096, cfg, GenParams(ssc_b=6))
    assert k != cache_key("ssf", 4096, cfg)
    assert len(k) == 12


def test_meta_roundtrip():
    meta = {"b": 8, "algorithm": "ssc", "radices": "2x3"}
    text = format_meta(meta)
    assert text == "algorithm=ssc\nb=8\nradices=2x3\n"
    assert parse_meta("# comment\n" + text) == {"algorithm": "ssc", "b": "8", "radices": "2x3"}


def test_build_writes_and_reuses_cache(tmp_path):
    cfg = MachineConfig(n=256)
    prog, meta = build("school", 256, cfg, cache_dir=tmp_path)
    src = tmp_path / "school_256.lram"
    side = tmp_path / "school_256.meta"
    assert src.exists() and side.exists()
    assert parse_meta(side.read_text())["cache_key"] == meta["cache_key"]
    again, meta2 = build("school", 256, cfg, cache_dir=tmp_path)
    assert again == prog
    assert meta2["algorithm"] == "school" and meta2["registers"] == str(meta["registers"])


def test_stale_cache_is_regenerated(tmp_path):
    cfg = MachineConfig(n=256)
    prog, _ = build("karatsuba", 256, cfg, cache_dir=tmp_path)
    (tmp_path / "karatsuba_256.lram").write_text("halt\n")
    meta_path = tmp_path / "karatsuba_256.meta"
    meta_path.write_text(meta_path.read_text().replace("cache_key=", "cache_key=x"))
    again, _ = build("karatsuba", 256, cfg, cache_dir=tmp_path)
    assert again == prog
    assert (tmp_path / "karatsuba_256.lram").read_text() != "halt\n"


def test_params_reach_generators():
    cfg = MachineConfig(n=4096)
    assert generate("ssc", 4096, cfg, GenParams(ssc_b=6)).meta["b"] == 6
    assert generate("ssf", 4096, cfg, GenParams(ssf_b=128)).meta["level0_b"] == 128
    with pytest.raises(GenError):
        generate("ssf", 4096, cfg, GenParams(ssf_strategy="bogus"))


@pytest.mark.parametrize("alg", ALGORITHMS)
def test_generated_constants_fit_register_width(alg):
    from logram.isa import Const
    n = MIN_SIZE[alg]
    cfg = MachineConfig(n=n)
    prog = generate(alg, n, cfg).program()
    for ins in prog.instructions:
        for v in vars(ins).values():
            if isinstance(v, Const):
                assert v.value < 1 << cfg.W
