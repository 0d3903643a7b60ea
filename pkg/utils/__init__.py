# twocultures/utils/__init__.py
# 로그/알림 유틸리티
