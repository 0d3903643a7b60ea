# twocultures/dataframe/__init__.py
# 표 데이터 로드, 인코딩, 분할

from dataframe.dataset import Column, Dataset, load_csv, load_schema, sort_levels, NUMERIC, CATEGORICAL
from dataframe.design import DesignMatrix, EncodedFactor, encode, decode, split_terms
from dataframe.resample import FoldPlan, BootstrapSample, make_folds, bootstrap
