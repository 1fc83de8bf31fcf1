import json
import os
import sys
from functools import wraps

import click
import yaml
from prettytable import PrettyTable
from tabulate import tabulate

from novikov_cli.utils.exceptions import (
    EXIT_CODE_EXCEPTION_MAPPING, NovikovCliBaseException,
)
from novikov_cli.utils.logger import get_logger
from novikov_cli.utils.variables import SCHEMA_VERSION

_LOG = get_logger(__name__)

JSON_VIEW = 'json'
TABLE_VIEW = 'table'
CLI_VIEW = 'cli'

ERROR_STATUS = 'FAILED'
SUCCESS_STATUS = 'SUCCESS'
NOVIKOV_CLI_STATUS = 'status'
NOVIKOV_CLI_CODE = 'code'
NOVIKOV_CLI_SCHEMA = 'schema_version'
NOVIKOV_CLI_ERROR_TYPE = 'error_type'
NOVIKOV_CLI_MESSAGE = 'message'
NOVIKOV_CLI_META = 'meta'
NOVIKOV_CLI_TABLE_TITLE = 'table_title'
NOVIKOV_CLI_ITEMS = 'items'
NOVIKOV_CLI_RESULT = 'result'
NOVIKOV_CLI_WARNINGS = 'warnings'
MAX_COLUMNS_WIDTH = 46
FLOAT_FORMAT = '.9g'


class CommandResponse:
    def __init__(
            self,
            code: int = 0,
            message: str | None = None,
            items: list | None = None,
            result: dict | None = None,
            warnings=None,
            table_title=None,
            **kwargs
    ):
        """
        `items` are table rows, `result` is a report serialized as is in
        the JSON view. Extra kwargs become meta
        """
        self.code = code
        self.message = message
        self.warnings = warnings or []
        self.items = items
        self.result = result
        self.table_title = table_title
        self.meta = dict(kwargs)
        if not (self.items or self.result) and self.message is None:
            self.warnings.append(
                'Please provide "items", "result" or "message" parameter')


class ResponseFormatter:
    def __init__(self, function_result: CommandResponse, view_format: str):
        self.view_format = view_format
        self.function_result = function_result
        self.format_to_process_method = {
            CLI_VIEW: self.process_cli_view,
            JSON_VIEW: self.process_json_view,
            TABLE_VIEW: self.process_table_view
        }

    @staticmethod
    def _prettify_warnings(warnings: list):
        return f'{os.linesep}WARNINGS:{os.linesep}' + \
            f'{os.linesep}'.join(f'{i + 1}. {w}'
                                 for i, w in enumerate(warnings))

    @staticmethod
    def is_response_success(response_meta: CommandResponse) -> bool:
        return response_meta.code == 0

    @staticmethod
    def error_type(response_meta: CommandResponse) -> str:
        exception = EXIT_CODE_EXCEPTION_MAPPING.get(response_meta.code)
        return exception.__name__ if exception else 'UnknownError'

    def error_payload(self) -> dict:
        response_meta = self.function_result
        return {
            NOVIKOV_CLI_STATUS: ERROR_STATUS,
            NOVIKOV_CLI_CODE: response_meta.code,
            NOVIKOV_CLI_SCHEMA: SCHEMA_VERSION,
            NOVIKOV_CLI_ERROR_TYPE: self.error_type(response_meta),
            NOVIKOV_CLI_MESSAGE: response_meta.message,
            NOVIKOV_CLI_META: response_meta.meta,
        }

    @staticmethod
    def _summary(response_meta: CommandResponse) -> str:
        rows = [{k: v for k, v in item.items()
                 if not isinstance(v, (dict, list))}
                for item in response_meta.items or []]
        if not rows:
            return ''
        return tabulate(rows, headers='keys', floatfmt=FLOAT_FORMAT)

    def process_cli_view(self, status: str,
                         response_meta: CommandResponse) -> str:
        if status == ERROR_STATUS and not response_meta.items:
            return f'Error:{os.linesep}{response_meta.message}'
        parts = []
        if response_meta.table_title:
            parts.append(response_meta.table_title)
        if response_meta.items:
            parts.append(self._summary(response_meta))
        if response_meta.message:
            parts.append(response_meta.message)
        result = os.linesep.join(parts)
        if response_meta.warnings:
            result += self._prettify_warnings(response_meta.warnings)
        return result

    def process_json_view(self, status: str,
                          response_meta: CommandResponse) -> str:
        payload = {
            NOVIKOV_CLI_STATUS: status,
            NOVIKOV_CLI_CODE: response_meta.code,
            NOVIKOV_CLI_SCHEMA: SCHEMA_VERSION,
        }
        if response_meta.result is not None:
            payload[NOVIKOV_CLI_RESULT] = response_meta.result
        if response_meta.items is not None:
            payload[NOVIKOV_CLI_TABLE_TITLE] = response_meta.table_title
            payload[NOVIKOV_CLI_ITEMS] = response_meta.items
        if response_meta.message is not None:
            payload[NOVIKOV_CLI_MESSAGE] = response_meta.message
        payload[NOVIKOV_CLI_WARNINGS] = response_meta.warnings
        payload[NOVIKOV_CLI_META] = response_meta.meta
        return json.dumps(payload, indent=4)

    def process_table_view(self, status: str,
                           response_meta: CommandResponse) -> str:
        response = PrettyTable()
        items = response_meta.items
        if items:
            headers = list(dict.fromkeys(k for item in items for k in item))
            response.field_names = headers
            response.max_width = MAX_COLUMNS_WIDTH
            for item in items:
                response.add_row([self._cell(item.get(h, ''))
                                  for h in headers])
        else:
            response.field_names = [NOVIKOV_CLI_STATUS, NOVIKOV_CLI_CODE,
                                    NOVIKOV_CLI_MESSAGE]
            response._max_width = {NOVIKOV_CLI_STATUS: 10,
                                   NOVIKOV_CLI_CODE: 5,
                                   NOVIKOV_CLI_MESSAGE: 70}
            response.add_row([status, response_meta.code,
                              response_meta.message])
        result = str(response)
        if response_meta.meta:
            meta = yaml.dump({self.format_title(k): v
                              for k, v in response_meta.meta.items()})
            result = meta + result
        if response_meta.table_title:
            result = response_meta.table_title + os.linesep + result
        if response_meta.warnings:
            result += self._prettify_warnings(response_meta.warnings)
        return result

    @staticmethod
    def _cell(value):
        if isinstance(value, float):
            return format(value, FLOAT_FORMAT)
        if isinstance(value, (dict, list)):
            return json.dumps(value)
        return value

    def prettify_response(self) -> str:
        status = SUCCESS_STATUS if self.is_response_success(
            self.function_result) else ERROR_STATUS
        view_processor = self.format_to_process_method[self.view_format]
        return view_processor(status=status,
                              response_meta=self.function_result)

    @staticmethod
    def format_title(title: str) -> str:
        """
        Human-readable
        """
        return title.replace('_', ' ').capitalize()


class ResponseDecorator:
    """
    Wrapper for formatting cli command response. Library exceptions become
    responses carrying their exit code; failed responses also print a
    machine-readable error JSON on stderr and exit with their code
    :param stdout: function which prints response to the end user
    """

    def __init__(self, stdout):
        self.stdout = stdout

    def __call__(self, fn):
        @wraps(fn)
        def decorated(*args, **kwargs):
            func_log = _LOG.getChild(fn.__name__)
            view_format = CLI_VIEW
            if kwargs.pop(TABLE_VIEW, False):
                view_format = TABLE_VIEW
            if kwargs.pop(JSON_VIEW, False):
                view_format = JSON_VIEW
            try:
                resp = fn(*args, **kwargs)
            except NovikovCliBaseException as e:
                func_log.warning(f'{type(e).__name__}: {e}')
                resp = CommandResponse(code=e.code, message=str(e),
                                       error=type(e).__name__)
            formatter = ResponseFormatter(function_result=resp,
                                          view_format=view_format)
            if resp.items or resp.result is not None \
                    or ResponseFormatter.is_response_success(resp):
                self.stdout(formatter.prettify_response())
            if not ResponseFormatter.is_response_success(resp):
                click.echo(json.dumps(formatter.error_payload()), err=True)
                sys.exit(resp.code)

        return decorated


def view_options(func):
    """--json and --table flags consumed by ResponseDecorator"""
    func = click.option('--table', is_flag=True, default=False,
                        help='Show the response as a table')(func)
    func = click.option('--json', is_flag=True, default=False,
                        help='Show the response as JSON')(func)
    return func
