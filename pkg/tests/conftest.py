"""Shared fixtures: the stock 10-rung ladder and the pooled model preset."""

from __future__ import annotations

import pytest

from abrenergy import parse_ladder, preset

STOCK_LADDER_CSV = """\
name,width,height,label,bitrate_bps,codec
240p,428,182,240p,650000,HEVC
480p,854,382,480p,1250000,HEVC
576p,1024,458,576p,2000000,HEVC
720p,1280,572,720p,2500000,HEVC
960p,1440,644,960p,3500000,HEVC
1080p,1920,858,1080p,5000000,HEVC
1200p,2560,1144,1200p,7500000,HEVC
1440p,2880,1286,1440p,10000000,HEVC
1600p,3440,1536,1600p,15000000,HEVC
2160p,3840,1714,2160p,20000000,HEVC
"""


@pytest.fixture(scope="session")
def ladder():
    return parse_ladder(STOCK_LADDER_CSV)


@pytest.fixture(scope="session")
def overall():
    return preset("overall")
