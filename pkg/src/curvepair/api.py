"""
REST API Interface Module

HTTP front end for the same operations as the command line. Each request runs
one pipeline or oracle call synchronously.

Example Usage:
    # Run the API server
    python -m curvepair.api

    # Or use Flask CLI
    flask --app curvepair.api run --port 8000

    # API Endpoints:
    # GET /health - Health check
    # POST /approx - Run the simultaneous approximation, returns the JSON report
    # POST /verify - Run the interval oracle
    # POST /render - Render a JSON report as SVG
"""

import logging
import traceback
from datetime import datetime
from typing import Any, Dict, Optional

from flask import Flask, Response, jsonify, request
from flask_cors import CORS

from curvepair.config import RunConfig, Settings, configure_logging, load_settings
from curvepair.errors import ConfigurationError, CurvePairError
from curvepair.export import render_svg, report_to_dict
from curvepair.oracle import certify_intersections, check_smooth_transversal
from curvepair.poly import CurvePair, PolynomialError
from curvepair.pipeline import run_pipeline


logger = logging.getLogger(__name__)


# Initialize Flask app
app = Flask(__name__)
CORS(app)  # Enable CORS for all routes


# Global state
settings: Settings = Settings()
statistics: Dict[str, int] = {'approx_runs': 0, 'verify_runs': 0, 'renders': 0, 'failures': 0}


def create_success_response(
    message: str,
    data: Optional[Dict[str, Any]] = None,
    status_code: int = 200
) -> tuple:
    """
    Create a standardized success response.

    Args:
        message: Success message
        data: Optional data payload
        status_code: HTTP status code

    Returns:
        Tuple of (response_dict, status_code)
    """
    response = {
        'success': True,
        'message': message,
        'timestamp': datetime.now().isoformat()
    }

    if data is not None:
        response['data'] = data

    return jsonify(response), status_code


def create_error_response(
    message: str,
    error_type: str,
    stage: str,
    status_code: int,
    box: Optional[Dict[str, int]] = None,
    details: Optional[Any] = None
) -> tuple:
    """
    Create an error response shaped like the CLI's error object.

    Args:
        message: Error message
        error_type: Exception class name, or a request-level error name
        stage: Pipeline stage that failed ('request' before any stage runs)
        status_code: HTTP status code
        box: Address of the box the failure is tied to
        details: Stage-specific fields

    Returns:
        Tuple of (response_dict, status_code)
    """
    error = {
        'type': error_type,
        'stage': stage,
        'message': message,
        'timestamp': datetime.now().isoformat()
    }
    if box is not None:
        error['box'] = box
    if details:
        error['details'] = details

    return jsonify({'success': False, 'error': error}), status_code


def _domain_error_response(e: CurvePairError) -> tuple:
    """Input errors map to 400, pipeline failures to 422."""
    statistics['failures'] += 1
    status_code = 400 if isinstance(e, (ConfigurationError, PolynomialError)) else 422
    return create_error_response(
        message=e.message,
        error_type=type(e).__name__,
        stage=e.stage,
        status_code=status_code,
        box=e.box_address(),
        details=e.details
    )


def _unexpected_error_response(action: str, e: Exception) -> tuple:
    statistics['failures'] += 1
    logger.error(f"Error during {action}: {str(e)}")
    logger.error(traceback.format_exc())
    return create_error_response(
        message=f'{action.capitalize()} failed: {str(e)}',
        error_type='InternalServerError',
        stage=action,
        status_code=500
    )


def _missing_body_response() -> tuple:
    return create_error_response(
        message='Request body must be a JSON object',
        error_type='ValidationError',
        stage='request',
        status_code=400
    )


def _request_body() -> Optional[Dict[str, Any]]:
    data = request.get_json(silent=True)
    return data if isinstance(data, dict) else None


# ============================================================================
# API Endpoints
# ============================================================================

@app.route('/health', methods=['GET'])
def health_check():
    """
    Health check endpoint.

    Example:
        GET /health

        Response:
        {
            "success": true,
            "message": "Service is healthy",
            "data": {
                "status": "healthy",
                "settings": {"max_depth": 24, ...},
                "statistics": {"approx_runs": 3, ...}
            }
        }
    """
    return create_success_response(
        message='Service is healthy',
        data={
            'status': 'healthy',
            'settings': settings.to_dict(),
            'statistics': dict(statistics)
        }
    )


@app.route('/approx', methods=['POST'])
def approximate():
    """
    Run the simultaneous approximation.

    Request Body:
        {
            "f": "x^2 + y^2 - 4",
            "g": "(x-2)^2 + y^2 - 4",
            "region": [-4, -4, 4, 4],
            "max_depth": 24,
            "min_depth": 0,
            "emit_partition": false
        }

    Returns:
        JSON response whose data is the schema-1 report
    """
    data = _request_body()
    if not data:
        return _missing_body_response()
    try:
        config = RunConfig.from_dict(data, settings)
        result = run_pipeline(config)
        report = report_to_dict(result, emit_partition=config.emit_partition)
        statistics['approx_runs'] += 1
        return create_success_response(
            message=f"Found {result.total_crossings} crossings",
            data=report
        )
    except CurvePairError as e:
        return _domain_error_response(e)
    except Exception as e:
        return _unexpected_error_response('approximation', e)


@app.route('/verify', methods=['POST'])
def verify():
    """
    Run the interval oracle.

    Request Body:
        {
            "f": "x", "g": "y", "region": [-1, -1, 1, 1],
            "grid_depth": 6
        }

    Returns:
        JSON response with certified roots and the smoothness/transversality verdict
    """
    data = _request_body()
    if not data:
        return _missing_body_response()
    try:
        missing = [key for key in ('f', 'g', 'region') if key not in data]
        if missing:
            raise ConfigurationError(f"Missing required fields: {', '.join(missing)}", details={'missing': missing})
        region = tuple(int(v) for v in data['region'])
        if len(region) != 4 or region[0] >= region[2] or region[1] >= region[3]:
            raise ConfigurationError(f"Invalid region {list(region)}")
        grid_depth = int(data.get('grid_depth', settings.oracle_grid_depth))
        if grid_depth < 1:
            raise ConfigurationError(f"grid_depth must be at least 1, got {grid_depth}")

        pair = CurvePair.parse(data['f'], data['g'])
        roots = certify_intersections(pair, region, grid_depth, settings.oracle_split_cap)
        hypotheses = check_smooth_transversal(pair, region, grid_depth, settings.oracle_split_cap)
        statistics['verify_runs'] += 1
        return create_success_response(
            message=f"Certified {len(roots)} intersections",
            data={
                'input': pair.to_dict(),
                'region': list(region),
                'count': len(roots),
                'roots': [root.to_dict() for root in roots],
                'smooth_transversal': hypotheses
            }
        )
    except CurvePairError as e:
        return _domain_error_response(e)
    except (TypeError, ValueError) as e:
        statistics['failures'] += 1
        return create_error_response(
            message=f"Invalid request field: {str(e)}",
            error_type='ValidationError',
            stage='config',
            status_code=400
        )
    except Exception as e:
        return _unexpected_error_response('verification', e)


@app.route('/render', methods=['POST'])
def render():
    """
    Render a schema-1 report (as returned in the data of /approx) as SVG.

    Returns:
        image/svg+xml document
    """
    data = _request_body()
    if not data:
        return _missing_body_response()
    try:
        svg_text = render_svg(data)
        statistics['renders'] += 1
        return Response(svg_text, mimetype='image/svg+xml')
    except CurvePairError as e:
        return _domain_error_response(e)
    except Exception as e:
        return _unexpected_error_response('rendering', e)


@app.errorhandler(404)
def not_found(error):
    """Unknown path."""
    return create_error_response(
        message=f"No endpoint at {request.path}",
        error_type='NotFoundError',
        stage='request',
        status_code=404,
        details={'endpoints': ['/health', '/approx', '/verify', '/render']}
    )


@app.errorhandler(405)
def method_not_allowed(error):
    """Known path, wrong method."""
    return create_error_response(
        message=f"{request.method} is not allowed on {request.path}",
        error_type='MethodNotAllowedError',
        stage='request',
        status_code=405,
        details={'allowed': sorted(error.valid_methods or [])}
    )


@app.errorhandler(500)
def internal_server_error(error):
    logger.error(f"Internal server error: {str(error)}")
    return create_error_response(
        message='Internal server error',
        error_type='InternalServerError',
        stage='request',
        status_code=500
    )


# ============================================================================
# Application Initialization
# ============================================================================

def create_app(config: Optional[Dict[str, Any]] = None) -> Flask:
    """
    Create and configure the Flask application.

    Args:
        config: Optional configuration dictionary

    Returns:
        Configured Flask application
    """
    global settings

    settings = load_settings()
    configure_logging(settings.log_level)
    if config:
        app.config.update(config)

    logger.info("Flask application created and configured")

    return app


# ============================================================================
# Main Entry Point
# ============================================================================

if __name__ == '__main__':
    # Create application
    create_app()

    # Run development server
    logger.info("Starting Flask development server")
    app.run(
        host=settings.api_host,
        port=settings.api_port,
        debug=True
    )
