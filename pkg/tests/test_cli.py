"""
Tests for the command line: exit codes, diagnostics and output formats
"""
import pytest

from config import DEFAULT_MAX_DEPTH, EXIT_RUNTIME, EXIT_USAGE

MONOMORPHISM_OK_DUMP = """\
null
obj@0 : Student<none, none> { supervisor = null, next = null }
pool@0 : StudentSplit<pool@0, pool@1> size=1 clusters=[[supervisor],[next]] | record 0: ((pool@1, 0))(null)
pool@1 : ProfessorSplit<pool@1, pool@0> size=1 clusters=[[advisee]] | record 0: ((pool@0, 0))
"""


def test_check_clean_file_prints_nothing(run_cli, corpus_dir):
    code, out, err = run_cli("check", corpus_dir / "linked_list.shapes")
    assert code == 0
    assert out == ""
    assert err == ""


def test_check_reports_monomorphism_error_at_the_bad_allocation(run_cli, corpus_dir):
    path = corpus_dir / "pool_monomorphism_bad.shapes"
    code, out, err = run_cli("check", path)
    assert code == 1
    assert out == ""
    [line] = err.splitlines()
    assert line.startswith(f"{path}:13:")
    assert "error[E210]" in line


def test_check_names_the_repeated_layout_field(run_cli, corpus_dir):
    code, _, err = run_cli("check", corpus_dir / "video_repeated_field.shapes")
    assert code == 1
    assert "error[E220]" in err
    assert "likes" in err


def test_run_prints_receiver_for_this(run_cli, corpus_dir):
    assert run_cli("run", corpus_dir / "this_entry.shapes", "--entry", "Solo::self") == (0, "obj@0\n", "")


def test_run_golden_heap_dump(run_cli, corpus_dir):
    code, out, _ = run_cli(
        "run", corpus_dir / "pool_monomorphism_ok.shapes", "--entry", "Student::generate", "--dump-heap",
    )
    assert code == 0
    assert out == MONOMORPHISM_OK_DUMP


@pytest.mark.parametrize("name, entry", [
    ("pool_monomorphism_ok.shapes", "Student::generate"),
    ("linked_list_soa.shapes", "School::build"),
    ("deep_calls.shapes", "Driver::go"),
])
def test_invariant_checking_leaves_stdout_unchanged(run_cli, corpus_dir, name, entry):
    plain = run_cli("run", corpus_dir / name, "--entry", entry, "--dump-heap")
    checked = run_cli("run", corpus_dir / name, "--entry", entry, "--dump-heap", "--check-invariants")
    assert plain[0] == checked[0] == 0
    assert plain[1] == checked[1]


def test_run_trace_lines_precede_the_result(run_cli, corpus_dir):
    code, out, _ = run_cli("run", corpus_dir / "this_entry.shapes", "--entry", "Solo::self", "--trace")
    assert code == 0
    assert out.splitlines() == ["trace Variable obj@0", "obj@0"]


def test_null_dereference_exits_2(run_cli, corpus_dir):
    code, out, err = run_cli("run", corpus_dir / "null_deref.shapes", "--entry", "Solo::chase")
    assert code == 2
    assert out == ""
    assert err.startswith("runtime error[R001]: ")


def test_call_depth_limit_exits_2(run_cli, corpus_dir):
    code, _, err = run_cli("run", corpus_dir / "runaway.shapes", "--entry", "Loop::spin", "--max-depth", "100")
    assert code == 2
    assert "runtime error[R002]" in err


def test_run_of_ill_typed_program_exits_1(run_cli, corpus_dir):
    code, out, err = run_cli("run", corpus_dir / "null_statement.shapes", "--entry", "Solo::self")
    assert code == 1
    assert out == ""
    assert ":6:" in err and "error[E201]" in err


def test_unknown_entry_method_is_a_static_error(run_cli, corpus_dir):
    path = corpus_dir / "this_entry.shapes"
    code, _, err = run_cli("run", path, "--entry", "Solo::missing")
    assert code == 1
    assert err.startswith(f"{path}:")
    assert "error[E100]" in err


def test_missing_file_exits_3(run_cli, tmp_path):
    code, out, err = run_cli("check", tmp_path / "absent.shapes")
    assert code == 3
    assert out == ""
    assert "cannot read" in err


def test_parse_error_reports_position(run_cli, tmp_path):
    path = tmp_path / "broken.shapes"
    path.write_text("class A<<a: [A<<a>>]>> {\n    f A<<a>>;\n}\n")
    code, _, err = run_cli("check", path)
    assert code == 1
    assert err.startswith(f"{path}:2:")
    assert "error[E001]" in err


def test_diagnostics_are_stable_across_runs(run_cli, corpus_dir):
    path = corpus_dir / "pool_homogeneity_bad.shapes"
    assert run_cli("check", path) == run_cli("check", path)


@pytest.mark.parametrize("argv", [
    ["run", "x.shapes", "--entry", "Main"],
    ["run", "x.shapes", "--entry", "Main::"],
    ["run", "x.shapes", "--entry", "Main::main", "--max-depth", "0"],
    ["run", "x.shapes"],
    ["bench", "--n", "0"],
])
def test_bad_arguments_are_usage_errors(run_cli, capsys, argv):
    """Usage errors never share the runtime-error exit code"""
    with pytest.raises(SystemExit) as exc_info:
        run_cli(*argv)
    assert exc_info.value.code == EXIT_USAGE != EXIT_RUNTIME
    assert "usage error:" in capsys.readouterr().err


def test_bench_prints_two_labelled_lines(run_cli):
    code, out, _ = run_cli("bench", "--n", "3")
    assert code == 0
    pooled, unpooled = out.splitlines()
    assert pooled.startswith("pooled n=3 seconds=")
    assert unpooled.startswith("unpooled n=3 seconds=")


def test_call_depth_limit_at_the_default_depth(run_cli, corpus_dir):
    code, out, err = run_cli("run", corpus_dir / "runaway.shapes", "--entry", "Loop::spin")
    assert code == EXIT_RUNTIME
    assert out == ""
    assert err.strip() == f"runtime error[R002]: call depth exceeded {DEFAULT_MAX_DEPTH}"


def test_file_that_is_not_utf8_is_a_parse_error(run_cli, tmp_path):
    path = tmp_path / "binary.shapes"
    path.write_bytes(b"class A<<a: [A<<a>>]>> {\n  \xff\xfe\n}\n")
    code, out, err = run_cli("check", path)
    assert code == 1
    assert out == ""
    assert err.startswith(f"{path}:2:3: error[E001]")
    assert "0xff" in err


def test_long_assignment_chain_checks_and_runs(run_cli, tmp_path):
    chain = " = ".join(["x"] * 5000)
    path = tmp_path / "chain.shapes"
    path.write_text(
        "class A<<a: [A<<a>>]>> {\n"
        "    def m(x: A<<a>>): A<<a>> {\n"
        "        pools\n"
        "        locals\n"
        "        ;\n"
        f"        x = {chain} = this;\n"
        "        x\n"
        "    }\n"
        "}\n"
    )
    assert run_cli("check", path) == (0, "", "")
    assert run_cli("run", path, "--entry", "A::m") == (0, "obj@0\n", "")
