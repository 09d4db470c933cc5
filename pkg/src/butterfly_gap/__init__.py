from .__about__ import __version__
from .channels import ChannelModel
from .topology import build_grid
