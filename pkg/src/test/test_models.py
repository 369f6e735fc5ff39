"""
Unit tests for batching, the target and instructor networks, parameters and checkpoints
"""
import numpy as np
import pytest

from src.chemgraph import parse_smiles
from src.core.errors import CheckpointError, InvalidSpec
from src.models import (
    FusionStats, InstructorModel, ModelSpec, TargetModel, collate, encode_graph, encode_smiles,
    init_params, instructor_forward, iter_batches, load_checkpoint, params_digest, read_checkpoint,
    restore, save_checkpoint, snapshot, target_forward,
)
from src.ndcore import RngStreams, bce, grad_check, mae, mse, rmse
from src.ndcore.tensor import Tensor
from src.semisup import class_weights, instructor_loss

SMALL = dict(hidden_dim=4, num_layers=1, head_layers=1, dropout=0.0, fingerprint_width=64,
             instructor_hidden_dim=4, edge_hidden_dim=4)
TARGET_LOSSES = {'mse': mse, 'rmse': rmse, 'mae': mae}
GRAD_SEEDS = range(20)


def _spec(**kwargs):
    values = dict(SMALL)
    values.update(kwargs)
    return ModelSpec(**values)


def _encode(smiles_list, width=64):
    return [encode_smiles(s, radius=2, width=width) for s in smiles_list]


class TestBatching:
    """Test molecule encoding and batch assembly"""

    def test_collate_shapes(self):
        """Test a batch with an isolated atom and a chain"""
        batch = collate(_encode(["C", "CCO"]))
        assert batch.num_graphs == 2
        assert batch.num_nodes == 4
        assert batch.edge_src.shape == (4,)
        assert batch.edge_attr.shape[0] == 4
        assert batch.adjacency.shape == (4, 4)
        assert np.allclose(np.asarray(batch.membership.sum(axis=1)).ravel(), [1, 3])
        assert np.allclose(np.asarray(batch.mean_pool.sum(axis=1)).ravel(), [1, 1])
        assert list(batch.segment_ids) == [0, 1, 1, 1]
        assert batch.fingerprints.shape == (2, 64)

    def test_block_diagonal(self):
        """Test atoms of different molecules are never adjacent"""
        batch = collate(_encode(["CC", "CC"]))
        adj = batch.adjacency.toarray()
        assert adj[0, 1] == 1.0
        assert adj[0, 2] == 0.0
        assert adj[1, 3] == 0.0

    def test_empty_batch(self):
        """Test collating nothing is rejected"""
        with pytest.raises(ValueError):
            collate([])

    def test_iter_batches_order(self):
        """Test batches follow the given order and cover every molecule once"""
        mols = _encode(["C", "CC", "CCC", "CCCC", "CCCCC"])
        chunks = [list(chunk) for chunk, _ in iter_batches(mols, 2, np.array([4, 0, 2, 1, 3]))]
        assert chunks == [[4, 0], [2, 1], [3]]


class TestModelSpec:
    """Test spec validation and hashing"""

    def test_invalid_dimensions(self):
        """Test non-positive sizes and unknown options are reported"""
        with pytest.raises(InvalidSpec):
            TargetModel(_spec(hidden_dim=0))
        with pytest.raises(InvalidSpec):
            TargetModel(_spec(pooling='max'))
        assert _spec(dropout=1.0).issues()

    def test_digest(self):
        """Test the digest is stable and sensitive to every field"""
        assert _spec().digest() == _spec().digest()
        assert len(_spec().digest()) == 32
        assert _spec().digest() != _spec(hidden_dim=8).digest()


class TestTargetModel:
    """Test the target network"""

    @pytest.mark.parametrize("backbone,pooling,edges", [
        ('gin', 'sum', False),
        ('gin', 'mean', False),
        ('gin', 'attention', False),
        ('gin', 'attention', True),
        ('fingerprint_mlp', 'sum', False),
    ])
    def test_forward_shape(self, backbone, pooling, edges):
        """Test one finite prediction per molecule"""
        spec = _spec(backbone=backbone, pooling=pooling, use_edge_features=edges, num_layers=2, head_layers=2)
        model = TargetModel(spec)
        params = init_params(spec, RngStreams(0)).target
        out = target_forward(model, params, collate(_encode(["C", "CCO", "c1ccccc1O"])))
        assert out.shape == (3,)
        assert np.isfinite(out.data).all()
        assert len(params) == len(model.declarations())

    def test_mode_validation(self):
        """Test only train and eval modes are accepted"""
        spec = _spec()
        model = TargetModel(spec)
        params = init_params(spec, RngStreams(0)).target
        with pytest.raises(ValueError):
            target_forward(model, params, collate(_encode(["CC"])), mode='infer')

    def test_eval_mode_deterministic(self):
        """Test eval mode ignores dropout and repeats exactly"""
        spec = _spec(dropout=0.5, hidden_dim=8)
        model = TargetModel(spec)
        params = init_params(spec, RngStreams(1)).target
        batch = collate(_encode(["CCO", "CCN"]))
        a = target_forward(model, params, batch, 'eval').data
        b = target_forward(model, params, batch, 'eval', rng=np.random.default_rng(5)).data
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("pooling", ['sum', 'mean', 'attention'])
    def test_permutation_invariance(self, pooling):
        """Test relabeling atoms leaves GIN predictions unchanged"""
        spec = _spec(pooling=pooling, num_layers=2, hidden_dim=8, use_edge_features=True)
        model = TargetModel(spec)
        params = init_params(spec, RngStreams(2)).target
        graph = parse_smiles("CC(=O)Nc1ccc(O)cc1")
        order = list(np.random.default_rng(9).permutation(graph.num_atoms))
        original = model.predict(params, collate([encode_graph(graph, 2, 64)]))
        permuted = model.predict(params, collate([encode_graph(graph.permuted(order), 2, 64)]))
        assert np.allclose(original, permuted, atol=1e-10)

    def test_permutation_invariance_corpus(self):
        """Test relabeling atoms across fifty corpus molecules"""
        from src.datasets.synthetic import desk_corpus
        spec = _spec(pooling='attention', num_layers=2, hidden_dim=8)
        model = TargetModel(spec)
        params = init_params(spec, RngStreams(8)).target
        rng = np.random.default_rng(0)
        for smiles in desk_corpus(50):
            graph = parse_smiles(smiles)
            order = list(rng.permutation(graph.num_atoms))
            original = model.predict(params, collate([encode_graph(graph, 2, 64)]))
            permuted = model.predict(params, collate([encode_graph(graph.permuted(order), 2, 64)]))
            assert np.allclose(original, permuted, atol=1e-9), smiles

    @pytest.mark.parametrize('loss_name', sorted(TARGET_LOSSES))
    @pytest.mark.parametrize('seed', GRAD_SEEDS)
    def test_grad_check_gin(self, seed, loss_name):
        """Test GIN gradients against finite differences for every target loss"""
        spec = _spec(backbone='gin', pooling='attention')
        model = TargetModel(spec)
        params = init_params(spec, RngStreams(seed)).target
        batch = collate(_encode(["CO", "CCN", "c1ccccc1O"]))
        y = Tensor(np.random.default_rng(seed).normal(size=3))
        loss = TARGET_LOSSES[loss_name]
        assert grad_check(lambda: loss(model.forward(params, batch), y), params, tol=1e-4) <= 1e-4

    @pytest.mark.parametrize('loss_name', sorted(TARGET_LOSSES))
    @pytest.mark.parametrize('seed', GRAD_SEEDS)
    def test_grad_check_fingerprint_mlp(self, seed, loss_name):
        """Test fingerprint MLP gradients against finite differences for every target loss"""
        spec = _spec(backbone='fingerprint_mlp')
        model = TargetModel(spec)
        params = init_params(spec, RngStreams(seed)).target
        batch = collate(_encode(["CO", "CCN", "c1ccccc1O"]))
        y = Tensor(np.random.default_rng(seed).normal(size=3))
        loss = TARGET_LOSSES[loss_name]
        assert grad_check(lambda: loss(model.forward(params, batch), y), params, tol=1e-4) <= 1e-4


class TestInstructorModel:
    """Test the instructor network"""

    def test_confidences_in_open_interval(self):
        """Test p stays strictly inside (0, 1), even for extreme losses"""
        spec = _spec(instructor_encoder='gin', pooling='attention')
        model = InstructorModel(spec)
        params = init_params(spec, RngStreams(0)).instructor
        batch = collate(_encode(["C", "CCO", "c1ccccc1"]))
        y = np.array([0.0, 1.0, 2.0])
        hf = np.array([0.1, np.inf, 1e9])
        stats = FusionStats.from_arrays(y, np.array([0.1, 0.2, 0.3]))
        p = instructor_forward(model, params, batch, y, hf, stats)
        assert p.shape == (3,)
        assert np.all(p > 0.0) and np.all(p < 1.0)

    def test_fusion_stats(self):
        """Test standardisation constants and the constant-column floor"""
        stats = FusionStats.from_arrays(np.array([1.0, 1.0]), np.array([0.0, 2.0]))
        assert stats.y_mean == 1.0
        assert stats.y_std == 1.0
        assert stats.hf_mean == 1.0
        assert stats.hf_std == 1.0
        feats = stats.features(np.array([1.0]), np.array([2.0]))
        assert np.allclose(feats, [[0.0, 1.0]])
        assert FusionStats.from_arrays(np.array([]), np.array([])) == FusionStats()

    def _grad_check_case(self, seed):
        spec = _spec()
        model = InstructorModel(spec)
        params = init_params(spec, RngStreams(seed)).instructor
        batch = collate(_encode(["CO", "CCN", "c1ccccc1O", "CC(=O)N"]))
        rng = np.random.default_rng(seed)
        y = rng.normal(size=4)
        hf = rng.uniform(0.1, 2.0, size=4)
        stats = FusionStats.from_arrays(y, hf)
        return model, params, batch, y, hf, stats

    @pytest.mark.parametrize('seed', GRAD_SEEDS)
    def test_grad_check(self, seed):
        """Test unweighted instructor BCE gradients against finite differences"""
        model, params, batch, y, hf, stats = self._grad_check_case(seed)
        c = Tensor([1.0, 0.0, 1.0, 0.0])
        fn = lambda: bce(model.forward(params, batch, y, hf, stats), c)
        assert grad_check(fn, params, tol=1e-4) <= 1e-4

    @pytest.mark.parametrize('seed', GRAD_SEEDS)
    def test_grad_check_weighted(self, seed):
        """Test class-weighted instructor BCE gradients against finite differences"""
        model, params, batch, y, hf, stats = self._grad_check_case(seed)
        c = np.array([1.0, 1.0, 1.0, 0.0])
        weights = class_weights(c)
        assert weights[3] > weights[0]
        fn = lambda: instructor_loss(model.forward(params, batch, y, hf, stats), c, weights)
        assert grad_check(fn, params, tol=1e-4) <= 1e-4


class TestParams:
    """Test initialisation, snapshots and digests"""

    def test_init_deterministic(self):
        """Test equal seeds give equal parameters and different seeds do not"""
        spec = _spec()
        a = init_params(spec, RngStreams(11))
        b = init_params(spec, RngStreams(11))
        c = init_params(spec, RngStreams(12))
        assert a.target_digest() == b.target_digest()
        assert a.instructor_digest() == b.instructor_digest()
        assert a.target_digest() != c.target_digest()

    def test_target_independent_of_instructor(self):
        """Test changing the instructor does not change the target's initial weights"""
        a = init_params(_spec(), RngStreams(5))
        b = init_params(_spec(instructor_hidden_dim=16, instructor_encoder='gin'), RngStreams(5))
        assert a.target_digest() == b.target_digest()

    def test_disjoint_names(self):
        """Test f and g own disjoint parameter names"""
        p = init_params(_spec(), RngStreams(0))
        assert not set(p.target) & set(p.instructor)

    def test_biases_zero(self):
        """Test biases and GIN eps start at zero"""
        p = init_params(_spec(backbone='gin'), RngStreams(0)).target
        for name, t in p.items():
            if name.endswith('.b') or name.endswith('.eps'):
                assert np.all(t.data == 0.0), name

    def test_snapshot_restore(self):
        """Test restore puts back the snapshot values"""
        p = init_params(_spec(), RngStreams(0)).target
        saved = snapshot(p)
        digest = params_digest(p)
        for t in p.values():
            t.data += 1.0
        assert params_digest(p) != digest
        restore(p, saved)
        assert params_digest(p) == digest


class TestCheckpoint:
    """Test checkpoint files"""

    def test_save_and_load(self, tmp_path):
        """Test a loaded checkpoint reproduces the saved parameters"""
        spec = _spec()
        saved = init_params(spec, RngStreams(0)).target
        path = save_checkpoint(tmp_path / 'f.ckpt', spec, saved, 'target')
        fresh = init_params(spec, RngStreams(99)).target
        load_checkpoint(path, spec, fresh, 'target')
        assert params_digest(fresh) == params_digest(saved)
        header = read_checkpoint(path)
        assert header['version'] == 1
        assert header['role'] == 0

    def test_spec_mismatch(self, tmp_path):
        """Test loading under another spec is refused"""
        spec = _spec()
        path = save_checkpoint(tmp_path / 'f.ckpt', spec, init_params(spec, RngStreams(0)).target)
        other = _spec(hidden_dim=8)
        with pytest.raises(CheckpointError):
            load_checkpoint(path, other, init_params(other, RngStreams(0)).target)

    def test_role_mismatch(self, tmp_path):
        """Test a target checkpoint cannot be loaded as the instructor"""
        spec = _spec()
        params = init_params(spec, RngStreams(0))
        path = save_checkpoint(tmp_path / 'f.ckpt', spec, params.target, 'target')
        with pytest.raises(CheckpointError):
            load_checkpoint(path, spec, params.instructor, 'instructor')

    def test_corrupt_files(self, tmp_path):
        """Test bad magic, truncation and missing files"""
        spec = _spec()
        path = save_checkpoint(tmp_path / 'f.ckpt', spec, init_params(spec, RngStreams(0)).target)
        raw = path.read_bytes()
        (tmp_path / 'magic.ckpt').write_bytes(b'X' + raw[1:])
        (tmp_path / 'short.ckpt').write_bytes(raw[:-8])
        for name in ('magic.ckpt', 'short.ckpt', 'missing.ckpt'):
            with pytest.raises(CheckpointError):
                read_checkpoint(tmp_path / name)
