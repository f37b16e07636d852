# Copyright 2026 The ANRS Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import anrs


def small_config(tmp_path):
    config = anrs.Config()
    for key, value in {
        "word_dim": 8, "filters": 6, "window": 3, "category_dim": 4,
        "category_embedding_dim": 5, "attention_dim": 5, "aspects": 3,
        "title_len": 6, "abstract_len": 8, "history_len": 2, "min_count": 1,
        "neg_ratio": 2, "aspect_negatives": 2, "batch_size": 4, "epochs": 1,
    }.items():
        config[key] = value
    config["run_dir"] = str(tmp_path / "run")
    return config


SMALL_CORPUS = dict(words_per_cluster=20, news=16, users=6, dim=8,
                    categories=3, history=2, train_impressions=3,
                    test_impressions=2, candidates=4, seed=3)


def test_metrics_match_hand_values():
    assert anrs.auc([1, 0, 0], [0.9, 0.1, 0.5]) == 1.0
    assert anrs.auc([1, 0], [0.5, 0.5]) == 0.5
    assert anrs.auc([1, 1], [0.2, 0.3]) is None
    assert anrs.mrr([0, 1, 0], [0.9, 0.5, 0.1]) == 0.5
    assert anrs.ndcg([1, 0], [0.1, 0.9], 5) == pytest.approx(1 / math.log2(3))
    report = anrs.summarize([([1, 0], [0.9, 0.1]), ([0, 1], [0.9, 0.1])])
    assert report["AUC"] == 0.5
    assert report["impressions"] == 2
    with pytest.raises(ValueError):
        anrs.auc([1], [0.1, 0.2])


def test_click_probability_and_orthogonality():
    assert anrs.click_probability(0.25, [0.25] * 6) == pytest.approx(1 / 7)
    assert anrs.orthogonality_penalty(np.eye(3)) == pytest.approx(0.0, abs=1e-12)
    dup = np.array([[1.0, 2.0], [1.0, 2.0]])
    assert anrs.orthogonality_penalty(dup) == pytest.approx(math.sqrt(2))


def test_kmeans_separates_blobs():
    rng = np.random.default_rng(0)
    points = np.vstack([rng.normal(-5, 0.1, (20, 2)), rng.normal(5, 0.1, (20, 2))])
    centers = anrs.kmeans(points, 2, seed=1)
    assert centers.shape == (2, 2)
    assert sorted(np.round(centers[:, 0])) == [-5.0, 5.0]


def test_config_defaults_and_round_trip():
    config = anrs.Config()
    assert config["word_dim"] == "300"
    assert config["aspects"] == "40"
    config["seed"] = 9
    assert anrs.Config.parse(config.dump()) == config
    with pytest.raises(ValueError):
        config["no_such_key"] = 1


def test_synthetic_training_reports_metrics(tmp_path):
    result = anrs.run_synthetic(small_config(tmp_path), **SMALL_CORPUS)
    assert len(result["epochs"]) == 1
    epoch = result["epochs"][0]
    assert epoch["total"] == pytest.approx(epoch["U"] + epoch["J"] + epoch["F"])
    assert 0.0 <= result["test"]["AUC"] <= 1.0


def test_cli_pipeline_and_checkpoint(tmp_path):
    config = small_config(tmp_path)
    anrs.write_synthetic(tmp_path / "data", config, **SMALL_CORPUS)
    conf = tmp_path / "toy.conf"
    conf.write_text(config.dump())
    code, out, err = anrs.run_cli(["preprocess", "--config", str(conf)])
    assert code == 0, err
    assert "cache written" in out
    code, out, err = anrs.run_cli(["train", "--config", str(conf)])
    assert code == 0, err
    assert "AUC\tMRR\tnDCG@5\tnDCG@10" in out
    ckpt = anrs.load_checkpoint(tmp_path / "run" / "checkpoints" / "best.ckpt")
    assert ckpt["params"]["aspect_matrix"].shape == (3, 8)
    assert ckpt["config"] == anrs.Config.load(conf)
    code, _, _ = anrs.run_cli(["train", "--config", str(tmp_path / "missing.conf")])
    assert code == 2
