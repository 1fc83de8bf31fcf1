import os

from setuptools import setup

entrypoint = os.environ.get('NOVIKOV_CLI_ENTRY_POINT', 'novikov')

setup(
    entry_points={
        "console_scripts": [
            f"{entrypoint}=novikov_cli.novikov_cli:novikov"
        ]
    }
)
