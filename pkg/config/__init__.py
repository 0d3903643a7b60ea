# twocultures/config/__init__.py
# 설정: 경로, 데이터셋 목록, 실험 설정 파일
