import io
import subprocess
import sys

import pytest

from cherimem.cli import RunConfig, main, run_file


def run_capture(path, **kw):
    out, err = io.StringIO(), io.StringIO()
    code = run_file(path, RunConfig(**kw), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_listing_1():
    code, out, _ = run_capture("corpus/listing_1.gilc")
    assert code == 10
    assert out.strip() == "CHERI error: TagViolation at pc=9"


def test_double_free():
    code, out, err = run_capture("corpus/double_free.gilc")
    assert code == 11
    assert "UseAfterFree" in out


def test_libc_memcpy_passes():
    for cs in (16, 32):
        code, out, _ = run_capture("corpus/libc_memcpy.gilc", cap_size=cs)
        assert code == 0, out


def test_bare_corpus_name():
    assert run_capture("invalid_free")[0] == 11


def test_trace_one_line_per_step():
    code, out, _ = run_capture("corpus/dangling_ptr.gilc", trace=True)
    lines = out.splitlines()
    assert lines[:-1] == ["pc=0 p := alloc 4", "pc=1 store u32 p 42", "pc=2 q := free p",
                          "pc=3 x := load u32 p"]
    assert lines[-1] == "Logic error: UseAfterFree at pc=3"


def test_exit_codes(tmp_path):
    cases = {"halt": 0, "x := 1 +": 2, "x := load u8 null": 10, "x := free null + 0": 10,
             "x := y": 11, "assert 0": 12, "l:\ngoto l": 13}
    for src, expected in cases.items():
        f = tmp_path / "p.gilc"
        f.write_text(src)
        code, out, err = run_capture(str(f), max_steps=50)
        assert code == expected, (src, out, err)


def test_parse_error_reported_on_stderr(tmp_path):
    f = tmp_path / "bad.gilc"
    f.write_text("halt\ngoto nope\n")
    code, out, err = run_capture(str(f))
    assert code == 2 and out == ""
    assert "bad.gilc:2:6: parse error: undefined label 'nope'" in err


def test_missing_file():
    code, _, err = run_capture("/nonexistent/x.gilc")
    assert code == 1 and err


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(cap_size=24)
    with pytest.raises(ValueError):
        RunConfig(max_steps=0)


def test_main_corpus_listing(capsys):
    assert main(["corpus"]) == 0
    assert "corpus/listing_1.gilc" in capsys.readouterr().out.split()


def test_main_subprocess():
    proc = subprocess.run([sys.executable, "-m", "cherimem", "run", "corpus/listing_1.gilc",
                           "--cap-size", "32"], capture_output=True, text=True)
    assert proc.returncode == 10
    assert proc.stdout.strip() == "CHERI error: TagViolation at pc=9"


def test_main_rejects_bad_cap_size():
    with pytest.raises(SystemExit) as e:
        main(["run", "corpus/listing_1.gilc", "--cap-size", "8"])
    assert e.value.code == 2
