from django.apps import AppConfig


class ScenesimConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.scenesim'
    verbose_name = '合成场景'
