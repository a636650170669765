from django.apps import AppConfig


class OptimizerConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.optimizer'
    verbose_name = '逆深度与位姿的直接优化'
