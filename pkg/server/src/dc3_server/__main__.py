"""Run the model server: ``python -m dc3_server``.

Honors PORT (default 8800), HOST (default 127.0.0.1) and MODEL_DIR.
"""

import os

import uvicorn

from .app import create_app


def main() -> None:
    host = os.environ.get("HOST", "127.0.0.1")
    port = int(os.environ.get("PORT", "8800"))
    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
