# twocultures/utils/telegram.py
# 텔레그램 알림 전송 (긴 벤치마크 실행의 시작/종료 통보)

import os

from dotenv import load_dotenv
import requests
from requests.exceptions import RequestException

from utils.logger import get_logger

load_dotenv()
log = get_logger("telegram")


def send_telegram_message(message, timeout=10):
    """TELEGRAM_TOKEN, TELEGRAM_CHAT_ID가 모두 있을 때만 전송. 성공 여부를 돌려준다."""
    token = os.getenv("TELEGRAM_TOKEN")
    chat_id = os.getenv("TELEGRAM_CHAT_ID")
    if not token or not chat_id:
        log.debug("TELEGRAM_TOKEN 또는 TELEGRAM_CHAT_ID가 설정되지 않아 알림을 건너뜁니다.")
        return False

    url = f"https://api.telegram.org/bot{token}/sendMessage"
    data = {
        "chat_id": chat_id,
        "text": message,
        "parse_mode": "HTML",
    }
    try:
        response = requests.post(url, data=data, timeout=timeout)
        if response.status_code != 200:
            log.warning(f"❌ 텔레그램 전송 실패: {response.text}")
            return False
    except RequestException as e:
        log.warning(f"🚫 텔레그램 요청 중 오류 발생: {e}")
        return False
    return True


# 텔레그램 메시지 템플릿 모음
MSG_RUN_START = (
    "🚀 <b>[실험 시작]</b>\n"
    "📍 실험: <b>{name}</b>\n"
    "🔢 모델: {n_models}개, {k}-폴드\n"
    "🎲 seed: {seed}"
)

MSG_RUN_DONE = (
    "✅ <b>[실험 완료]</b>\n"
    "📍 실험: <b>{name}</b>\n"
    "🏆 최저 위험: <b>{best}</b> ({best_risk:.4g})\n"
    "⏰ 소요시간: {elapsed:.1f}초"
)

MSG_RUN_FAILED = (
    "❌ <b>[실험 실패]</b>\n"
    "📍 실험: <b>{name}</b>\n"
    "사유: {error}"
)
