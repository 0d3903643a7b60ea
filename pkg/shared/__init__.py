# twocultures/shared/__init__.py
# 모듈 공통 도구 (예외 계층, 시드 스트림)
