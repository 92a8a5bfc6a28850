import logging

from flask import Flask
from flask.cli import FlaskGroup

from config import Config
from depth import depth_bp
from localization import localization_bp
from mapping import mapping_bp
from simulation import simulation_bp


def create_app(config_class=Config):
    app = Flask(__name__)
    app.config.from_object(config_class)

    logging.basicConfig(
        level=app.config["LOG_LEVEL"],
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    app.logger.setLevel(app.config["LOG_LEVEL"])

    # register blueprints (each contributes its CLI commands)
    app.register_blueprint(depth_bp)
    app.register_blueprint(localization_bp)
    app.register_blueprint(mapping_bp)
    app.register_blueprint(simulation_bp)

    return app


cli = FlaskGroup(create_app=create_app)


if __name__ == '__main__':
    cli()
