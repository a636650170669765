"""
Django settings for the depthmask project.

For more information on this file, see
https://docs.djangoproject.com/en/4.2/topics/settings/

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# 读取项目根目录下的 .env（若存在）
load_dotenv(BASE_DIR / '.env')

# 本项目只提供命令行与库，不对外提供 HTTP 服务
SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'depthmask-local-only-key')

DEBUG = os.environ.get('DJANGO_DEBUG', 'false').lower() == 'true'

ALLOWED_HOSTS = []

# 工具箱默认参数（库代码不读取 settings，只由管理命令读取）
DEPTHMASK = {
    'SEED': int(os.environ.get('DEPTHMASK_SEED', 42)),
    'THREADS': int(os.environ.get('DEPTHMASK_THREADS', 1)),
    'LOG_LEVEL': os.environ.get('DEPTHMASK_LOG_LEVEL', 'INFO'),
    'PRESET_RESOLUTION': (128, 96),
}

LOG_DIR = BASE_DIR / 'logs'

# 日志配置
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        'file': {
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': LOG_DIR / 'depthmask.log',
            'maxBytes': 1024 * 1024 * 5,  # 5 MB
            'backupCount': 5,
            'formatter': 'verbose',
            'delay': True,
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console', 'file'],
            'level': 'INFO',
            'propagate': True,
        },
        'apps': {
            'handlers': ['console', 'file'],
            'level': DEPTHMASK['LOG_LEVEL'],
            'propagate': False,
        },
    },
}


# Application definition

INSTALLED_APPS = [
    # 第三方应用
    'rest_framework',

    # 自定义应用
    'apps.system',
    'apps.geometry',
    'apps.warp',
    'apps.photometric',
    'apps.masking',
    'apps.scenesim',
    'apps.optimizer',
    'apps.evaluation',
    'apps.cli',
]

# 无数据库：所有领域类型都是基于 numpy 的数据类
DATABASES = {}

# Internationalization
# https://docs.djangoproject.com/en/4.2/topics/i18n/

LANGUAGE_CODE = 'zh-hans'

TIME_ZONE = 'Asia/Shanghai'

USE_I18N = True

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# acceptance 测试需显式 --tag acceptance
TEST_RUNNER = 'apps.system.test_runner.DepthMaskTestRunner'
