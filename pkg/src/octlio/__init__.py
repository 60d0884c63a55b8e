from .config import OdometryConfig as OdometryConfig, configure as configure, load_config as load_config
from .hknn import build_traversal_list as build_traversal_list, knn_search as knn_search
from .octvox import OctVoxMap as OctVoxMap
from .pipeline import Odometry as Odometry

__version__ = "0.1.0"
