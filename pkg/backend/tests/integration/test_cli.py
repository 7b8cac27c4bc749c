import json
import re
import socket

import pytest

from backend.app.cli import EXIT_ADAPTER, EXIT_BIND, EXIT_OK, EXIT_PARSE, EXIT_STORAGE, BindError, check_bind, format_hit_line, main
from backend.app.evalkit import save_task_suite
from backend.app.evalkit.environment import TaskSpec
from backend.tests.conftest import FIXED_NOW, make_trajectory

ORB_ID = re.compile(r"^[0-9a-f]{64}$")


@pytest.fixture
def data_dir(tmp_path):
    return tmp_path / "memory"


@pytest.fixture
def episode_file(tmp_path):
    path = tmp_path / "episode.json"
    path.write_text(make_trajectory().model_dump_json(), encoding="utf-8")
    return path


def run(capsys, *argv):
    code = main([str(arg) for arg in argv])
    captured = capsys.readouterr()
    return code, captured.out.splitlines(), captured.err


class TestIngest:
    def test_ingest_prints_orb_id(self, capsys, data_dir, episode_file):
        code, lines, _ = run(capsys, "--data-dir", data_dir, "ingest", episode_file, "--now", "2025-03-14T09:26:53Z")
        assert code == EXIT_OK
        assert ORB_ID.match(lines[0])
        assert lines[1:4] == ["created=true", "prefix_ok=true", "new_plan_ok=true"]

    def test_second_ingest_updates(self, capsys, data_dir, episode_file):
        run(capsys, "ingest", episode_file, "--data-dir", data_dir)
        code, lines, _ = run(capsys, "ingest", episode_file, "--data-dir", data_dir)
        assert code == EXIT_OK
        assert lines[1] == "created=false"

    def test_wrapped_request(self, capsys, data_dir, tmp_path):
        path = tmp_path / "wrapped.json"
        payload = {"trajectory": make_trajectory().model_dump(mode="json"), "now": FIXED_NOW.isoformat()}
        path.write_text(json.dumps(payload), encoding="utf-8")
        code, lines, _ = run(capsys, "--json", "--data-dir", data_dir, "ingest", path)
        assert code == EXIT_OK
        body = json.loads(lines[0])
        assert body["created"] is True
        assert ORB_ID.match(body["orb_id"])

    def test_missing_file(self, capsys, data_dir, tmp_path):
        code, _, err = run(capsys, "--data-dir", data_dir, "ingest", tmp_path / "absent.json")
        assert code == EXIT_PARSE
        assert "error: File not found" in err

    def test_incomplete_trajectory(self, capsys, data_dir, tmp_path):
        path = tmp_path / "open.json"
        path.write_text(make_trajectory(reward=None).model_dump_json(), encoding="utf-8")
        code, _, _ = run(capsys, "--data-dir", data_dir, "ingest", path)
        assert code == EXIT_PARSE

    def test_unreachable_completion_backend(self, capsys, data_dir, episode_file):
        code, lines, err = run(capsys, "--data-dir", data_dir, "--llm-endpoint", "http://127.0.0.1:1/", "ingest", episode_file)
        assert code == EXIT_ADAPTER
        assert lines == []
        assert "error:" in err

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as exc:
            main(["forget"])
        assert exc.value.code == 2


class TestQuery:
    def test_empty_store(self, capsys, data_dir):
        code, lines, _ = run(capsys, "--data-dir", data_dir, "query", "--q", "where is my parcel")
        assert code == EXIT_OK
        assert lines == ["0 hits"]

    def test_hit_lines(self, capsys, data_dir, episode_file):
        _, ingest_lines, _ = run(capsys, "--data-dir", data_dir, "ingest", episode_file)
        code, lines, _ = run(capsys, "--data-dir", data_dir, "query", "--q", "dented kettle refund", "--user", "user-002")
        assert code == EXIT_OK
        assert lines[0] == "1 hits"
        rank, score, short_id, excerpt = lines[1].split("\t")
        assert rank == "1"
        assert re.match(r"^-?\d+\.\d{6}$", score)
        assert short_id == ingest_lines[0][:8]
        assert excerpt.startswith("I failed in this mission")

    def test_ablation_flag(self, capsys, data_dir, tmp_path):
        for i in range(3):
            path = tmp_path / f"episode-{i}.json"
            path.write_text(make_trajectory([f"Kettle case {i}.", "Still broken."]).model_dump_json(), encoding="utf-8")
            run(capsys, "--data-dir", data_dir, "ingest", path)
        code, lines, _ = run(capsys, "--data-dir", data_dir, "--no-cross-user", "query", "--q", "kettle")
        assert code == EXIT_OK
        assert lines[0] == "1 hits"

    def test_invalid_k(self, capsys, data_dir):
        code, _, _ = run(capsys, "--data-dir", data_dir, "--k", "0", "query", "--q", "kettle")
        assert code == EXIT_PARSE

    def test_excerpt_is_truncated(self):
        line = format_hit_line(1, 0.5, "a" * 64, "word " * 40)
        assert line.split("\t")[3].endswith("...")
        assert len(line.split("\t")[3]) == 80


class TestStoreCommands:
    def test_stats_and_snapshot(self, capsys, data_dir, episode_file):
        run(capsys, "--data-dir", data_dir, "ingest", episode_file)

        code, lines, _ = run(capsys, "--data-dir", data_dir, "--json", "snapshot")
        assert code == EXIT_OK
        assert json.loads(lines[0])["vector_count"] == 1
        assert (data_dir / "vectors.bin").exists()

        code, lines, _ = run(capsys, "stats", "--data-dir", data_dir)
        assert code == EXIT_OK
        assert "orb_count: 1" in lines
        assert "dim: 768" in lines

    def test_corrupt_vector_file(self, capsys, data_dir, episode_file):
        run(capsys, "--data-dir", data_dir, "ingest", episode_file)
        (data_dir / "vectors.bin").write_bytes(b"JUNK" + bytes(32))
        code, _, err = run(capsys, "--data-dir", data_dir, "stats")
        assert code == EXIT_STORAGE
        assert "error:" in err

    def test_config_file(self, capsys, data_dir, tmp_path):
        config = tmp_path / "memorb.env"
        config.write_text(f"DATA_DIR={data_dir}\nEMBED_DIM=64\nTOPK_DEFAULT=3\n", encoding="utf-8")
        code, lines, _ = run(capsys, "--config", config, "--json", "stats")
        assert code == EXIT_OK
        stats = json.loads(lines[0])
        assert stats["dim"] == 64
        assert stats["k_default"] == 3


class TestEval:
    def test_no_memory_run(self, capsys, tmp_path):
        out = tmp_path / "reports"
        code, lines, _ = run(capsys, "--json", "eval", "--no-memory", "--trials", "2", "--seed", "42", "--out", out)
        assert code == EXIT_OK
        body = json.loads(lines[0])
        assert body["label"] == "no_memory"
        assert body["tasks"] == 50
        assert len(body["cumulative"]) == 2
        assert (out / "no_memory_pass_k.json").exists()

    def test_memory_run_with_task_file(self, capsys, tmp_path):
        tasks = tmp_path / "tasks.json"
        save_task_suite(
            [TaskSpec(task_id="t1", scenario="The blender lid cracked.", required_cue="send a replacement lid", difficulty=1.0, user_id="user-1")],
            tasks,
        )
        code, lines, _ = run(capsys, "eval", "--tasks", tasks, "--trials", "3", "--out", tmp_path / "reports")
        assert code == EXIT_OK
        assert lines[1] == "cumulative 0.0000 1.0000 1.0000"
        assert lines[2] == "pass^1 = 0.666667"

    def test_bad_task_file(self, capsys, tmp_path):
        tasks = tmp_path / "tasks.json"
        tasks.write_text("{}", encoding="utf-8")
        code, _, _ = run(capsys, "eval", "--tasks", tasks, "--out", tmp_path / "reports")
        assert code == EXIT_PARSE


class TestServe:
    def test_bind_probe_reports_busy_port(self):
        with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as holder:
            holder.bind(("127.0.0.1", 0))
            holder.listen(1)
            port = holder.getsockname()[1]
            with pytest.raises(BindError):
                check_bind("127.0.0.1", port)

    def test_serve_exit_code_on_busy_port(self, capsys, data_dir, monkeypatch):
        monkeypatch.setenv("LISTEN_ADDR", "127.0.0.1:1")

        def refuse(host, port):
            raise BindError(f"cannot listen on {host}:{port}")

        monkeypatch.setattr("backend.app.cli.check_bind", refuse)
        code, _, err = run(capsys, "--data-dir", data_dir, "serve")
        assert code == EXIT_BIND
        assert "cannot listen" in err
