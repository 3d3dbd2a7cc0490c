import os
import subprocess
import sys

import squarec as sq

CLI = [sys.executable, "-m", "squarec.cli"]


def run(args, cwd, env_extra=None, expect=0):
    env = dict(os.environ)
    env.setdefault("MPLBACKEND", "Agg")
    if env_extra:
        env.update(env_extra)
    proc = subprocess.run(CLI + args, cwd=cwd, env=env,
                          capture_output=True, text=True)
    assert proc.returncode == expect, (proc.returncode, proc.stdout, proc.stderr)
    return proc


def test_generate_square_with_margin(tmp_path):
    run(["generate", "square", "--side", "128", "-o", "out"], tmp_path)
    shape = sq.load_shape(tmp_path / "out" / "square.pbm")
    assert shape.dims == (130, 130)
    assert shape.count == 128 * 128
    manifest = (tmp_path / "out" / "manifest.txt").read_text()
    assert "command=generate square" in manifest
    assert "flag.side=128" in manifest


def test_generate_appendage_family(tmp_path):
    run(["generate", "appendage", "--base", "128", "--widths", "96,64,32", "-o", "fam"],
        tmp_path)
    for i in range(4):
        assert (tmp_path / "fam" / f"appendage_s{i}.pbm").exists()


def test_generate_noisy_with_sidecar(tmp_path):
    run(["generate", "noisy", "--nf", "3", "--count", "5", "--seed", "7", "-o", "n"],
        tmp_path)
    assert (tmp_path / "n" / "noisy.pbm").exists()
    sidecar = (tmp_path / "n" / "noisy.txt").read_text()
    assert sidecar == "seed=7\nnf=3\ncount=5\n"
    manifest = (tmp_path / "n" / "manifest.txt").read_text()
    assert "flag.seed=7" in manifest


def test_generate_plan_and_cube(tmp_path):
    run(["generate", "plan", "--name", "P1", "-o", "p"], tmp_path)
    assert (tmp_path / "p" / "p1.pbm").exists()
    run(["generate", "cube", "--side", "6", "-o", "c"], tmp_path)
    assert sq.load_shape(tmp_path / "c" / "cube.vox3").count == 216


def test_profile_square_zero_and_deterministic(tmp_path):
    run(["generate", "square", "--side", "32", "-o", "."], tmp_path)
    run(["profile", "square.pbm", "-o", "prof"], tmp_path)
    csv = (tmp_path / "prof" / "square_profile.csv").read_bytes()
    lines = csv.decode().splitlines()
    assert lines[0] == "t,entropy,std"
    assert len(lines) == 1 + 16
    assert all(ln.split(",")[1] == "0" for ln in lines[1:])
    assert (tmp_path / "prof" / "profiles.png").exists()
    # rerun is byte-identical
    run(["profile", "square.pbm", "-o", "prof2"], tmp_path)
    assert (tmp_path / "prof2" / "square_profile.csv").read_bytes() == csv


def test_profile_no_plot(tmp_path):
    run(["generate", "square", "--side", "16", "-o", "."], tmp_path)
    run(["profile", "square.pbm", "--no-plot", "-o", "prof"], tmp_path)
    assert not (tmp_path / "prof" / "profiles.png").exists()


def test_profile_corrupt_file_exit2(tmp_path):
    bad = tmp_path / "bad.pbm"
    bad.write_bytes(b"P4\n5 5\n")
    proc = run(["profile", "bad.pbm"], tmp_path, expect=2)
    assert "bad.pbm" in proc.stderr


def test_profile_nonconvergence_exit3(tmp_path):
    run(["generate", "square", "--side", "24", "-o", "."], tmp_path)
    proc = run(["profile", "square.pbm", "--mode", "explicit", "--max-iters", "2",
                "-o", "p"], tmp_path, expect=3)
    assert "square.pbm" in proc.stderr
    manifest = (tmp_path / "p" / "manifest.txt").read_text()
    assert "partial=true" in manifest
    assert (tmp_path / "p" / "square_profile.csv").exists()


def test_compare_single_interval_order(tmp_path):
    run(["generate", "square", "--side", "24", "-o", "."], tmp_path)
    run(["generate", "disk", "--radius", "12", "-o", "."], tmp_path)
    run(["compare", "square.pbm", "disk.pbm", "--interval", "0,1", "--no-plot",
         "-o", "cmp"], tmp_path)
    order = (tmp_path / "cmp" / "order.csv").read_text().splitlines()
    assert order[0] == "rank,group_members,value"
    assert order[1].startswith("0,square")
    assert order[2].startswith("1,disk")
    assert (tmp_path / "cmp" / "indicators.csv").exists()


def test_compare_two_intervals_emit_dot(tmp_path):
    run(["generate", "square", "--side", "24", "-o", "."], tmp_path)
    run(["generate", "disk", "--radius", "12", "-o", "."], tmp_path)
    run(["compare", "square.pbm", "disk.pbm", "--interval", "0,0.25",
         "--interval", "0,1", "-o", "cmp"], tmp_path)
    dot = (tmp_path / "cmp" / "hasse.dot").read_text()
    assert dot.startswith("digraph hasse")
    assert '"square" -> "disk"' in dot
    assert (tmp_path / "cmp" / "hasse.png").exists()
    assert (tmp_path / "cmp" / "profiles.png").exists()


def test_compare_needs_two_shapes(tmp_path):
    run(["generate", "square", "--side", "8", "-o", "."], tmp_path)
    proc = run(["compare", "square.pbm"], tmp_path, expect=1)
    assert "need >= 2" in proc.stderr


def test_tau_identical_and_reversed(tmp_path):
    (tmp_path / "expected.txt").write_text("a\nb\nc\n")
    (tmp_path / "obs.csv").write_text("id,value\na,1\nb,2\nc,3\n")
    proc = run(["tau", "--expected", "expected.txt", "--observed", "obs.csv"], tmp_path)
    assert proc.stdout.strip() == "1.0000"
    (tmp_path / "rev.csv").write_text("a,3\nb,2\nc,1\n")
    proc = run(["tau", "--expected", "expected.txt", "--observed", "rev.csv"], tmp_path)
    assert proc.stdout.strip() == "-1.0000"


def test_tau_id_mismatch_exit2(tmp_path):
    (tmp_path / "expected.txt").write_text("a\nb\n")
    (tmp_path / "obs.csv").write_text("a,1\nz,2\n")
    run(["tau", "--expected", "expected.txt", "--observed", "obs.csv"],
        tmp_path, expect=2)


def test_field_command(tmp_path):
    run(["generate", "square", "--side", "12", "-o", "."], tmp_path)
    run(["field", "square.pbm", "-o", "f"], tmp_path)
    assert (tmp_path / "f" / "square.fld").read_bytes().startswith(b"FLD 2 ")
    report = (tmp_path / "f" / "square_report.txt").read_text()
    assert "converged=true" in report


def test_env_var_override(tmp_path):
    run(["generate", "square", "--side", "16", "-o", "."], tmp_path)
    run(["profile", "square.pbm", "--no-plot", "-o", "p"], tmp_path,
        env_extra={"SQUAREC_PROFILE_BINS": "16"})
    manifest = (tmp_path / "p" / "manifest.txt").read_text()
    assert "flag.bins=16" in manifest


def test_config_overlay_flag_wins(tmp_path):
    (tmp_path / "cfg.txt").write_text("profile.bins = 64\n")
    run(["generate", "square", "--side", "16", "-o", "."], tmp_path)
    run(["--config", "cfg.txt", "profile", "square.pbm", "--no-plot", "-o", "a"], tmp_path)
    assert "flag.bins=64" in (tmp_path / "a" / "manifest.txt").read_text()
    run(["--config", "cfg.txt", "profile", "square.pbm", "--bins", "128",
         "--no-plot", "-o", "b"], tmp_path)
    assert "flag.bins=128" in (tmp_path / "b" / "manifest.txt").read_text()


def test_usage_error_exit1(tmp_path):
    run(["generate", "square"], tmp_path, expect=1)    # missing required --side


def test_profile_3d_shape(tmp_path):
    run(["generate", "cube", "--side", "12", "-o", "."], tmp_path)
    run(["profile", "cube.vox3", "-o", "p"], tmp_path)
    lines = (tmp_path / "p" / "cube_profile.csv").read_text().splitlines()
    assert len(lines) == 1 + 6
    assert all(ln.split(",")[1] == "0" for ln in lines[1:])
