import json

import pytest

from novikov_cli.service.decorators import (
    CLI_VIEW, JSON_VIEW, TABLE_VIEW, CommandResponse, ResponseDecorator,
    ResponseFormatter,
)
from novikov_cli.utils.exceptions import NotSymmetricError


def test_empty_response_warns():
    response = CommandResponse()
    assert response.warnings


def test_json_view_carries_schema_version():
    response = CommandResponse(items=[{'m': 2, 'n': 1}], table_title='T',
                               result={'ok': True})
    payload = json.loads(ResponseFormatter(response, JSON_VIEW)
                         .prettify_response())
    assert payload['status'] == 'SUCCESS'
    assert payload['schema_version'] == 1
    assert payload['items'] == [{'m': 2, 'n': 1}]
    assert payload['result'] == {'ok': True}


def test_cli_view_skips_nested_values():
    response = CommandResponse(items=[{'m': 2, 'coords': [1, 2]}],
                               table_title='Angles')
    text = ResponseFormatter(response, CLI_VIEW).prettify_response()
    assert text.startswith('Angles')
    assert 'coords' not in text


def test_table_view():
    response = CommandResponse(items=[{'c0': 0.123456789012, 'ok': True}],
                               run='x')
    text = ResponseFormatter(response, TABLE_VIEW).prettify_response()
    assert '0.123456789' in text
    assert text.startswith('Run: x')


def test_decorator_turns_errors_into_exit_codes(capsys):
    @ResponseDecorator(print)
    def failing():
        raise NotSymmetricError('not symmetric')

    with pytest.raises(SystemExit) as exit_info:
        failing()
    assert exit_info.value.code == 1
    error = json.loads(capsys.readouterr().err)
    assert error['error_type'] == 'NovikovCliValidationException'
    assert error['message'] == 'not symmetric'


def test_decorator_prints_failed_reports(capsys):
    @ResponseDecorator(print)
    def verification(**kwargs):
        return CommandResponse(code=2, result={'pass': False},
                               message='bound violated')

    with pytest.raises(SystemExit) as exit_info:
        verification(json=True)
    assert exit_info.value.code == 2
    captured = capsys.readouterr()
    assert json.loads(captured.out)['status'] == 'FAILED'
    assert json.loads(captured.err)['code'] == 2
