#!/usr/bin/env python
"""depthmask 命令行入口。

常用命令:
    python manage.py simulate --preset static --out runs/static
    python manage.py optimize --scene runs/static --out runs/static_opt
    python manage.py ablate --preset contra_dir --out runs/ablation
    python manage.py masks --scene runs/static --out runs/static_masks
    python manage.py evaluate --pred runs/static_opt --gt runs/static --out runs/eval
    python manage.py replay runs/static/manifest.json
    python manage.py test
"""
import os
import sys


def main():
    """Run administrative tasks."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'project.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
