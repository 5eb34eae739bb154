import json

import pytest

from patchsem.main import build_parser, main

from .conftest import DIFF_DIR

TINY_TOML = """
[ingest]
token_limit = 4
line_limit = 3
description_limit = 3
min_freq = 1

[model]
embed_dim = 4
kernel_sizes = [1, 3]
conv_out = 4
residual_blocks = 1
residual_out = 4
pool_window = 2
refine_dim = 4
attn_dim = 4

[train]
learning_rate = 0.01
batch_size = 8
max_epochs = 2
"""


@pytest.fixture
def workspace(tmp_path):
    config = tmp_path / "tiny.toml"
    config.write_text(TINY_TOML)
    assert main(["synth", "--out", str(tmp_path / "train.jsonl"), "--count", "16", "--seed", "0"]) == 0
    assert main(["synth", "--out", str(tmp_path / "test.jsonl"), "--count", "8", "--seed", "1"]) == 0
    return tmp_path


def _train(workspace, out_name: str, *extra: str) -> int:
    return main(
        [
            "train",
            "--config", str(workspace / "tiny.toml"),
            "--data", str(workspace / "train.jsonl"),
            "--out", str(workspace / out_name),
            *extra,
        ]
    )


class TestParser:
    @pytest.mark.parametrize(
        "argv",
        [
            ["train"],
            ["eval", "--model", "m", "--data", "d"],
            ["predict", "--model", "m", "--patch", "p"],
            ["gradcheck"],
            ["ablate"],
            ["synth", "--out", "o"],
        ],
    )
    def test_subcommands(self, argv):
        args = build_parser().parse_args(argv)
        assert args.command == argv[0]
        assert callable(args.handler)

    def test_message_sources_are_exclusive(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(
                ["predict", "--model", "m", "--patch", "p", "--message", "x", "--message-from-header"]
            )


class TestTrainCommand:
    def test_writes_checkpoint_and_history(self, workspace, capsys):
        assert _train(workspace, "model.psem") == 0
        assert (workspace / "model.psem").is_file()
        history = (workspace / "model.history.jsonl").read_text().splitlines()
        assert json.loads(history[0])["config"]["train"]["max_epochs"] == 2
        assert "F1" in capsys.readouterr().out

    def test_identical_runs_give_identical_checkpoints(self, workspace):
        assert _train(workspace, "first.psem") == 0
        assert _train(workspace, "second.psem") == 0
        assert (workspace / "first.psem").read_bytes() == (workspace / "second.psem").read_bytes()

    def test_seed_changes_the_checkpoint(self, workspace):
        assert _train(workspace, "a.psem", "--seed", "0") == 0
        assert _train(workspace, "b.psem", "--seed", "1") == 0
        assert (workspace / "a.psem").read_bytes() != (workspace / "b.psem").read_bytes()

    def test_zero_epochs(self, workspace):
        assert _train(workspace, "init.psem", "--max-epochs", "0") == 0

    def test_even_kernel_is_a_config_error(self, workspace):
        assert _train(workspace, "bad.psem", "--set", "model.kernel_sizes=[2]") == 1
        assert not (workspace / "bad.psem").exists()

    def test_unknown_key_is_a_config_error(self, workspace):
        assert _train(workspace, "bad.psem", "--set", "model.bogus=1") == 1

    def test_dataset_that_is_not_utf8(self, workspace):
        (workspace / "latin1.jsonl").write_bytes(b'{"id": "x", "diff": "+\xff", "message": "m", "label": 1}\n')
        code = main(["train", "--config", str(workspace / "tiny.toml"), "--data", str(workspace / "latin1.jsonl"),
                     "--out", str(workspace / "m.psem")])
        assert code == 1

    def test_missing_data_file(self, workspace):
        code = main(["train", "--config", str(workspace / "tiny.toml"), "--data", str(workspace / "nope.jsonl"),
                     "--out", str(workspace / "m.psem")])
        assert code == 1

    def test_missing_out(self, workspace):
        code = main(["train", "--config", str(workspace / "tiny.toml"), "--data", str(workspace / "train.jsonl")])
        assert code == 1

    def test_single_class_dataset(self, workspace):
        lines = (workspace / "train.jsonl").read_text().splitlines()
        positives = [line for line in lines if '"label": 1' in line]
        (workspace / "positives.jsonl").write_text("\n".join(positives) + "\n")
        code = main(["train", "--config", str(workspace / "tiny.toml"), "--data", str(workspace / "positives.jsonl"),
                     "--out", str(workspace / "m.psem")])
        assert code == 1


class TestEvalAndPredict:
    @pytest.fixture
    def model(self, workspace):
        assert _train(workspace, "model.psem") == 0
        return workspace / "model.psem"

    def test_eval_report(self, workspace, model):
        report_path = workspace / "report.json"
        assert main(["eval", "--model", str(model), "--data", str(workspace / "test.jsonl"),
                     "--report", str(report_path)]) == 0
        payload = json.loads(report_path.read_text())
        assert len(payload["scores"]) == 8
        assert payload["metrics"]["support_pos"] + payload["metrics"]["support_neg"] == 8
        assert payload["config"]["ingest"]["token_limit"] == 4

    def test_threaded_eval_matches(self, workspace, model):
        serial, threaded = workspace / "serial.json", workspace / "threaded.json"
        data = str(workspace / "test.jsonl")
        assert main(["eval", "--model", str(model), "--data", data, "--report", str(serial)]) == 0
        assert main(["eval", "--model", str(model), "--data", data, "--report", str(threaded), "--workers", "3"]) == 0
        assert json.loads(serial.read_text())["scores"] == json.loads(threaded.read_text())["scores"]

    def test_predict_matches_eval(self, workspace, model, capsys):
        record = json.loads((workspace / "test.jsonl").read_text().splitlines()[0])
        (workspace / "one.patch").write_text(record["diff"])
        (workspace / "one.msg").write_text(record["message"])
        report_path = workspace / "report.json"
        assert main(["eval", "--model", str(model), "--data", str(workspace / "test.jsonl"),
                     "--report", str(report_path)]) == 0
        expected = json.loads(report_path.read_text())["scores"][0]["score"]
        capsys.readouterr()

        assert main(["predict", "--model", str(model), "--patch", str(workspace / "one.patch"),
                     "--message", str(workspace / "one.msg")]) == 0
        score, verdict = capsys.readouterr().out.split()
        assert score == f"{expected:.6f}"
        assert verdict == ("SECURITY" if expected >= 0.5 else "NON-SECURITY")

    def test_predict_threshold_bounds(self, workspace, model, capsys):
        patch = str(DIFF_DIR / "0001-nft-payload-length.patch")
        assert main(["predict", "--model", str(model), "--patch", patch, "--message-from-header",
                     "--threshold", "0"]) == 0
        assert capsys.readouterr().out.split()[1] == "SECURITY"
        assert main(["predict", "--model", str(model), "--patch", patch, "--threshold", "1.0000001"]) == 0
        assert capsys.readouterr().out.split()[1] == "NON-SECURITY"

    def test_predict_rejects_text_without_changes(self, workspace, model):
        prose = workspace / "prose.patch"
        prose.write_text("nothing to see here\n")
        assert main(["predict", "--model", str(model), "--patch", str(prose)]) == 1

    def test_corrupted_checkpoint(self, workspace, model):
        data = bytearray(model.read_bytes())
        data[20] ^= 0x01
        model.write_bytes(bytes(data))
        assert main(["eval", "--model", str(model), "--data", str(workspace / "test.jsonl")]) == 1


class TestGradcheckCommand:
    def test_passes_on_tiny_config(self, workspace, capsys):
        assert main(["gradcheck", "--config", str(workspace / "tiny.toml")]) == 0
        assert capsys.readouterr().out.strip().endswith("OK")

    def test_failure_exit_code(self, workspace):
        assert main(["gradcheck", "--config", str(workspace / "tiny.toml"), "--tolerance", "0"]) == 2


class TestAblateCommand:
    def test_prints_every_variant(self, workspace, capsys):
        assert main(["ablate", "--config", str(workspace / "tiny.toml"), "--data", str(workspace / "train.jsonl"),
                     "--set", "train.max_epochs=1"]) == 0
        rows = capsys.readouterr().out.strip().splitlines()
        names = [row.split()[0] for row in rows[1:]]
        assert names == ["full", "TL-", "SL-", "DL-"]
        counts = {row.split()[0]: int(row.split()[1]) for row in rows[1:]}
        assert all(counts[name] < counts["full"] for name in ("TL-", "SL-", "DL-"))
