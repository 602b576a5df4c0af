from dotenv import load_dotenv

# Load environment variables from .env file at the very beginning
# This MUST be the first thing to run.
load_dotenv()

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI

import config
from api import experiments, median

logging.basicConfig(level=config.LOG_LEVEL.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    config.RESULTS_DIR.mkdir(parents=True, exist_ok=True)
    logger.info("Private median service %s starting; results in %s.", config.VERSION, config.RESULTS_DIR)
    yield
    logger.info("Private median service shutting down.")

app = FastAPI(title="Private Geometric Median", version=config.VERSION, lifespan=lifespan)

@app.get("/")
async def root():
    return {"message": "Private geometric median service", "version": config.VERSION}

app.include_router(median.router, prefix="/api")
app.include_router(experiments.router, prefix="/api")
