from django.apps import AppConfig


class WarpConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.warp'
    verbose_name = '可微逆向变形'
