from django.apps import AppConfig


class PhotometricConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.photometric'
    verbose_name = '光度误差与平滑项'
