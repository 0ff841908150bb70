"""CLI behavior: exit statuses, stream separation, REPL session flow."""

import subprocess
import sys

from polyvm import cli


def run_cli(argv, capsys):
    status = cli.main(argv)
    captured = capsys.readouterr()
    return status, captured.out, captured.err


class TestRunFile:
    def test_plain_expression_quiet_success(self, tmp_path, capsys):
        path = tmp_path / "three.mpy"
        path.write_text("3\n")
        status, out, err = run_cli(["run", str(path)], capsys)
        assert status == 0
        assert out == ""
        assert err == ""

    def test_transcript_goes_to_stdout(self, tmp_path, capsys):
        path = tmp_path / "hello.mpy"
        path.write_text("print('hello')\nprint('world')\n")
        status, out, _ = run_cli(["run", str(path)], capsys)
        assert status == 0
        assert out == "hello\nworld\n"

    def test_unhandled_exception_to_stderr_status_one(self, tmp_path, capsys):
        path = tmp_path / "boom.mrb"
        path.write_text("10 / 0\n")
        status, out, err = run_cli(["run", str(path)], capsys)
        assert status == 1
        assert out == ""
        assert "UNHANDLED ZeroDivisionError" in err
        assert "[minirb] <main>" in err

    def test_unknown_extension_is_usage_error(self, tmp_path, capsys):
        path = tmp_path / "prog.txt"
        path.write_text("3\n")
        status, _, err = run_cli(["run", str(path)], capsys)
        assert status == 2
        assert "--lang" in err

    def test_lang_override(self, tmp_path, capsys):
        path = tmp_path / "prog.txt"
        path.write_text("puts 42\n")
        status, out, _ = run_cli(["run", str(path), "--lang", "minirb"], capsys)
        assert status == 0
        assert out == "42\n"

    def test_missing_file(self, capsys):
        status, _, err = run_cli(["run", "/nonexistent.mpy"], capsys)
        assert status == 2

    def test_compile_error_is_status_one(self, tmp_path, capsys):
        path = tmp_path / "bad.mpy"
        path.write_text("def f(:\n")
        status, _, err = run_cli(["run", str(path)], capsys)
        assert status == 1
        assert "compile error" in err

    def test_budget_env_var_with_flag_override(self, tmp_path, capsys,
                                               monkeypatch):
        path = tmp_path / "three.mpy"
        path.write_text("3\n")
        monkeypatch.setenv("POLYVM_BUDGET", "nonsense")
        status, _, err = run_cli(["run", str(path)], capsys)
        assert status == 2
        # an explicit flag wins over the broken environment value
        status, _, _ = run_cli(["run", str(path), "--budget", "50"], capsys)
        assert status == 0

    def test_bad_flag_is_usage_error(self, tmp_path, capsys):
        status, _, _ = run_cli(["run", "--budget", "x", "nowhere.mpy"], capsys)
        assert status == 2

    def test_headless_auto_proceed_runs_ensure(self, tmp_path, capsys):
        path = tmp_path / "fin.mpy"
        path.write_text(
            "try:\n"
            "    print('before')\n"
            "    raise ValueError('x')\n"
            "finally:\n"
            "    print('cleanup')\n")
        status, out, err = run_cli(["run", str(path)], capsys)
        assert status == 1
        assert out == "before\ncleanup\n"
        assert "UNHANDLED ValueError: x" in err


class TestPipelineCommand:
    def test_two_cell_pipeline(self, tmp_path, capsys):
        path = tmp_path / "pipe.poly"
        path.write_text(
            "header comment, ignored\n"
            "--- minipy\n"
            "'Hello World'\n"
            "--- minirb\n"
            'it.downcase.split(" ")\n')
        status, out, _ = run_cli(["pipeline", str(path)], capsys)
        assert status == 0
        lines = out.strip().split("\n")
        assert lines[0] == "'Hello World'"
        assert lines[1] == '["hello", "world"]'
        assert lines[2] == '["hello", "world"]'  # final display

    def test_single_cell_matches_run_status(self, tmp_path, capsys):
        source = "print('hi')\n'done'\n"
        run_path = tmp_path / "solo.mpy"
        run_path.write_text(source)
        status_run, out_run, _ = run_cli(["run", str(run_path)], capsys)
        pipe_path = tmp_path / "solo.poly"
        pipe_path.write_text("--- minipy\n" + source)
        status_pipe, out_pipe, _ = run_cli(["pipeline", str(pipe_path)], capsys)
        assert status_run == status_pipe == 0
        assert out_run in out_pipe

    def test_missing_separator_language_is_usage_error(self, tmp_path, capsys):
        path = tmp_path / "bad.poly"
        path.write_text("--- \nx\n")
        status, _, _ = run_cli(["pipeline", str(path)], capsys)
        assert status == 2

    def test_no_separator_is_usage_error(self, tmp_path, capsys):
        path = tmp_path / "bad.poly"
        path.write_text("1 + 1\n")
        status, _, _ = run_cli(["pipeline", str(path)], capsys)
        assert status == 2

    def test_failing_cell_gives_status_one(self, tmp_path, capsys):
        path = tmp_path / "fail.poly"
        path.write_text("--- minipy\n1 / 0\n")
        status, _, err = run_cli(["pipeline", str(path)], capsys)
        assert status == 1
        assert "UNHANDLED ZeroDivisionError" in err

    def test_intermediate_cell_transcripts_printed_in_order(self, tmp_path,
                                                            capsys):
        path = tmp_path / "chatty.poly"
        path.write_text(
            "--- minipy\n"
            "print('from cell zero')\n"
            "5\n"
            "--- minirb\n"
            "puts \"from cell one\"\n"
            "it * 2\n"
            "--- minipy\n"
            "print('from cell two')\n"
            "it + 1\n")
        status, out, _ = run_cli(["pipeline", str(path)], capsys)
        assert status == 0
        lines = out.strip().split("\n")
        assert lines == [
            "from cell zero", "5",
            "from cell one", "10",
            "from cell two", "11",
            "11",
        ]

    def test_bad_later_cell_fails_cleanly(self, tmp_path, capsys):
        path = tmp_path / "lately.poly"
        path.write_text("--- minipy\n1\n--- minirb\ndef broken(\n")
        status, _, err = run_cli(["pipeline", str(path)], capsys)
        assert status == 1
        assert "cell 1" in err


class TestRepl:
    def run_repl(self, lines, language="minipy"):
        proc = subprocess.run(
            [sys.executable, "-m", "polyvm.cli", "repl", language],
            input="\n".join(lines) + "\n", capture_output=True, text=True,
            timeout=60, cwd="/")
        return proc

    def test_persistent_bindings(self):
        proc = self.run_repl(["x = 2", "x + 1"])
        assert proc.returncode == 0
        outputs = [l.split("> ", 1)[-1] for l in proc.stdout.splitlines()]
        assert "3" in outputs

    def test_language_switch_keeps_bindings(self):
        proc = self.run_repl(["x = 2", ":lang minirb", "x + 1"])
        assert "3" in proc.stdout

    def test_guest_error_keeps_loop_alive(self):
        proc = self.run_repl(["1 / 0", "40 + 2"], language="minirb")
        assert proc.returncode == 0
        assert "ZeroDivisionError" in proc.stderr
        assert "42" in proc.stdout

    def test_inspect_command(self):
        proc = self.run_repl(["x = [1, 2]", ":inspect x"])
        assert "List" in proc.stdout


class TestServeCommand:
    def test_port_in_use_is_usage_error(self, capsys):
        import socket

        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.bind(("127.0.0.1", 0))
        probe.listen(1)
        port = probe.getsockname()[1]
        try:
            status = cli.main(["serve", "--port", str(port)])
        finally:
            probe.close()
        assert status == 2


class TestUsage:
    def test_no_command_is_usage_error(self, capsys):
        assert cli.main([]) == 2

    def test_unknown_command_is_usage_error(self, capsys):
        assert cli.main(["explode"]) == 2

    def test_help_exits_cleanly(self, capsys):
        assert cli.main(["--help"]) == 0
        assert "run" in capsys.readouterr().out
