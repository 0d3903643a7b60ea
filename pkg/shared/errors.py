# twocultures/shared/errors.py
# 툴킷 전체에서 사용하는 예외 계층


class TwoCulturesError(Exception):
    """모든 툴킷 예외의 최상위 클래스"""


# ── 데이터 ──────────────────────────────────────────────
class DataError(TwoCulturesError):
    pass


class CsvParseError(DataError, ValueError):
    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"{row}행: {message}"
        super().__init__(message)


class SchemaError(DataError, ValueError):
    pass


class FormulaError(DataError, ValueError):
    pass


# ── 모델 ────────────────────────────────────────────────
class ModelError(TwoCulturesError):
    pass


class RankDeficientError(ModelError, ValueError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"설계행렬이 완전계수가 아닙니다. 종속 열: {column}")


class NotLinearSmootherError(ModelError, TypeError):
    pass


class EmptyNeighborhoodError(ModelError, ValueError):
    def __init__(self, message="empty neighborhood"):
        super().__init__(message)


class DivergenceError(ModelError, ArithmeticError):
    """학습률이 너무 커서 파라미터가 유한하지 않을 때"""


# ── 검증 / 설정 ─────────────────────────────────────────
class ValidationError(TwoCulturesError, ValueError):
    pass


class ConfigError(TwoCulturesError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"[{field}] {message}")


class DatasetMissingError(TwoCulturesError, FileNotFoundError):
    def __init__(self, dataset, path):
        self.dataset = dataset
        self.path = path
        super().__init__(
            f"데이터셋 파일이 없습니다: {path}\n"
            f"👉 다음 명령으로 내려받으세요: python main.py fetch {dataset}"
        )
