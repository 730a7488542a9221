import io

import numpy as np
import pytest

from palmi.dataset import RawRecord, label_records, write_dataset
from palmi.evaluate import train_test_split
from palmi.preprocess import Preprocessor
from palmi.resample import SmoteConfig, smote_balance
from palmi.synth import generate_surrogate

BASE = dict(
    plasma_treatment_type="jet",
    gas_type="air",
    discharge_gap=5.0,
    plasma_treatment_time=60.0,
    liquid_type="diw",
    treatment_volume=1.0,
    microbial_strain="e.coli",
    initial_microbial_load=6.0,
    pal_mo_volume_ratio=10.0,
    contact_time=15.0,
    incubation_temperature=25.0,
    post_storage_time=0.0,
    mi_log_reduction=3.0,
)


def make_record(**overrides) -> RawRecord:
    return RawRecord(**{**BASE, **overrides})


def to_csv(records) -> str:
    buf = io.StringIO()
    write_dataset(records, buf)
    return buf.getvalue()


@pytest.fixture(scope="session")
def surrogate():
    return generate_surrogate(seed=0)


@pytest.fixture(scope="session")
def prepared(surrogate):
    """Train/test matrices of the default surrogate with SMOTE on the
    training part, as the run command builds them."""
    labels = label_records(surrogate)
    tr, te = train_test_split(len(surrogate), 0.2, labels, seed=0)
    pre = Preprocessor.fit([surrogate[i] for i in tr])
    train = pre.transform([surrogate[i] for i in tr])
    test = pre.transform([surrogate[i] for i in te])
    res = smote_balance(train.values, train.target, SmoteConfig(seed=0))
    return {
        "X": res.X,
        "y": res.y,
        "X_test": test.values,
        "y_test": test.target,
        "columns": train.columns,
        "X_raw": train.values,
        "y_raw": train.target,
    }


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
