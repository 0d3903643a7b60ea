# twocultures/config/datasets.py
# 벤치마크 데이터셋 목록 (출처 URL, 파일 이름, 원본 형식)
#   csv     : R 데이터셋 CSV, 첫 열이 행 이름이면 fetch 시 제거
#   uci     : 공백 구분, 헤더 없음 → columns 이름을 붙이고 recode 적용

from config.settings import data_dir

_RDATASETS = "https://vincentarelbundock.github.io/Rdatasets/csv"

CREDIT_COLUMNS = (
    'checking_status', 'duration', 'credit_history', 'purpose', 'credit_amount', 'savings',
    'employment', 'installment_rate', 'personal_status', 'other_parties', 'residence_since',
    'property_magnitude', 'age', 'other_payment_plans', 'housing', 'existing_credits', 'job',
    'num_dependents', 'telephone', 'foreign_worker', 'class',
)

DATASETS = {
    'carseats': {
        'url': f"{_RDATASETS}/ISLR/Carseats.csv",
        'file': 'carseats.csv',
        'format': 'csv',
        'n_rows': 400,
    },
    'caravan': {
        'url': f"{_RDATASETS}/ISLR/Caravan.csv",
        'file': 'caravan.csv',
        'format': 'csv',
        'n_rows': 5822,
    },
    'credit': {
        'url': "https://archive.ics.uci.edu/ml/machine-learning-databases/statlog/german/german.data",
        'file': 'credit.csv',
        'format': 'uci',
        'columns': CREDIT_COLUMNS,
        'recode': {'class': {'1': 'good', '2': 'bad'}},
        'n_rows': 1000,
    },
    'wage': {
        'url': f"{_RDATASETS}/AER/CPS1985.csv",
        'file': 'wage.csv',
        'format': 'csv',
        'n_rows': 534,
    },
    'boston': {
        'url': f"{_RDATASETS}/MASS/Boston.csv",
        'file': 'boston.csv',
        'format': 'csv',
        'n_rows': 506,
    },
}


def dataset_entry(key):
    try:
        return DATASETS[key]
    except KeyError:
        raise ValueError(f"등록되지 않은 데이터셋: {key} (가능: {', '.join(sorted(DATASETS))})") from None


def dataset_path(key):
    """TWOCULTURES_DATA_DIR 아래의 데이터셋 파일 경로"""
    return data_dir() / dataset_entry(key)['file']
