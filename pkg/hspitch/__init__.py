from .model import *
from .tools import *
