from flask import Flask, request, jsonify
from flask_cors import CORS
from werkzeug.exceptions import HTTPException
import traceback
import logging
from datetime import datetime

from glassceiling import __version__
from glassceiling.exceptions import DegenerateInput, GlassCeilingError

# Configure
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

app = Flask(__name__)
CORS(app)  # Enable CORS for notebook / dashboard clients

# Global measurement orchestrator
orch = None


def initialize_orchestrator():
    global orch
    try:
        logger.info("Initializing MeasurementOrchestrator...")
        from glassceiling.orchestrator import MeasurementOrchestrator
        orch = MeasurementOrchestrator()
        logger.info("✓ MeasurementOrchestrator initialized successfully")
    except Exception as e:
        logger.error(f"✗ MeasurementOrchestrator initialization failed: {e}")
        orch = None


def _require_orchestrator():
    if orch is None:
        raise RuntimeError("Orchestrator not initialized. Check package installation.")
    return orch


def _json_body():
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        return None
    return data


# Initialize when the app starts, for both local runs and gunicorn
initialize_orchestrator()


@app.route("/health", methods=["GET"])
def health():
    return jsonify({
        "status": "healthy",
        "version": __version__,
        "timestamp": datetime.now().isoformat(),
        "services": {
            "orchestrator": "available" if orch is not None else "unavailable",
        }
    }), 200


@app.route("/measure", methods=["POST"])
def measure_endpoint():
    logger.info("=== MEASURE ENDPOINT CALLED ===")
    data = _json_body()
    if data is None:
        return jsonify({"error": "Missing JSON body"}), 400
    return jsonify(_require_orchestrator().measure_payload(data))


@app.route("/jdam", methods=["POST"])
def jdam_endpoint():
    logger.info("=== JDAM ENDPOINT CALLED ===")
    data = _json_body()
    if data is None:
        return jsonify({"error": "Missing JSON body"}), 400
    return jsonify(_require_orchestrator().jdam_payload(data))


@app.errorhandler(GlassCeilingError)
def measurement_error(error):
    kind = "degenerate input" if isinstance(error, DegenerateInput) else "invalid input"
    logger.warning(f"Rejected request ({kind}): {error}")
    return jsonify({"error": str(error), "kind": kind}), 400


@app.errorhandler(404)
def not_found(error):
    return jsonify({"error": "Not found"}), 404


@app.errorhandler(Exception)
def internal_error(error):
    if isinstance(error, HTTPException):
        return jsonify({"error": error.description}), error.code
    logger.error(f"Server error: {error}\n{traceback.format_exc()}")
    return jsonify({"error": "Internal server error"}), 500


if __name__ == "__main__":
    logger.info("Starting glass-ceiling measurement server for local development...")
    logger.info("Starting Flask server on port 5001")
    app.run(host="127.0.0.1", port=5001)
